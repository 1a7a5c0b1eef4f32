use clap::Args;
use critshe::diagrams::{classify, count, enumerate};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::config::{parse, DiagramsConfig};
use crate::envelope::Envelope;
use crate::error::CliError;
use crate::Output;

/// Listing and classification stop here.
const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Args)]
pub struct DiagramsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Print only |Dgm(n, m)|.
    #[arg(long)]
    pub count: bool,
    /// Include every diagram in the envelope.
    #[arg(long)]
    pub list: bool,
}

pub fn diagrams(a: &DiagramsArgs, raw: Option<Value>) -> Result<Output, CliError> {
    let mut c: DiagramsConfig = parse(raw, DiagramsConfig::default())?;
    c.schema_version = crate::config::CONFIG_SCHEMA.into();
    if a.n.is_some() {
        c.n = a.n;
    }
    if a.m.is_some() {
        c.m = a.m;
    }
    c.list |= a.list;
    let n = c.n.ok_or_else(|| CliError::Validation("n is required (--n or config)".into()))?;
    let m = c.m.ok_or_else(|| CliError::Validation("m is required (--m or config)".into()))?;
    let total = count(n, m)?;
    if a.count {
        return Ok(Output {
            plain: Some(format!("{total}\n")),
            ..Output::default()
        });
    }
    let small = total.to_u64().filter(|&k| k <= ENUMERATION_LIMIT);
    if c.list && small.is_none() {
        return Err(CliError::Validation(format!(
            "|Dgm({n},{m})| = {total} is too many to list (limit {ENUMERATION_LIMIT})"
        )));
    }
    let mut results = json!({
        "n": n,
        "m": m,
        "count": total.to_u64().map(Value::from).unwrap_or_else(|| Value::from(total.to_string())),
    });
    if small.is_some() {
        let mut degenerate = 0u64;
        let mut listed = Vec::new();
        for d in enumerate(n, m)? {
            let cls = classify(&d);
            degenerate += cls.degenerate as u64;
            if c.list {
                listed.push(json!({ "pairs": d.pairs(), "degenerate": cls.degenerate }));
            }
        }
        results["degenerate"] = json!(degenerate);
        results["nondegenerate"] = json!(small.unwrap() - degenerate);
        if c.list {
            results["diagrams"] = Value::from(listed);
        }
    }
    let inputs = serde_json::to_value(&c).expect("serializable");
    Ok(Output {
        envelope: Some(Envelope::new("diagrams", inputs, json!({}), results, Vec::new())),
        ..Output::default()
    })
}
