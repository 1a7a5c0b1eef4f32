//! Cubic splines on uniform grids.

#[derive(Debug, Clone)]
pub struct UniformSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

/// End condition for the spline.
#[derive(Debug, Clone, Copy)]
pub enum EndCondition {
    /// zero second derivative
    Natural,
    /// prescribed first derivative
    Clamped(f64),
}

impl UniformSpline {
    pub fn new(x0: f64, h: f64, y: Vec<f64>, left: EndCondition, right: EndCondition) -> Self {
        assert!(y.len() >= 2 && h > 0.0);
        let m = second_derivatives(&y, h, left, right);
        Self { x0, h, y, m }
    }

    pub fn natural(x0: f64, h: f64, y: Vec<f64>) -> Self {
        Self::new(x0, h, y, EndCondition::Natural, EndCondition::Natural)
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.y
    }

    /// Evaluate; outside the grid the end cubic is extrapolated.
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.h;
        let last = self.y.len() - 2;
        let i = if s <= 0.0 { 0 } else { (s.floor() as usize).min(last) };
        let b = s - i as f64;
        let a = 1.0 - b;
        let h2 = self.h * self.h / 6.0;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2
    }
}

fn second_derivatives(y: &[f64], h: f64, left: EndCondition, right: EndCondition) -> Vec<f64> {
    // tridiagonal system: sub/diag/sup, rhs
    let n = y.len();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    match left {
        EndCondition::Natural => diag[0] = 1.0,
        EndCondition::Clamped(d) => {
            diag[0] = 2.0;
            sup[0] = 1.0;
            rhs[0] = 6.0 * ((y[1] - y[0]) / h - d) / h;
        }
    }
    for i in 1..n - 1 {
        sub[i] = 1.0;
        diag[i] = 4.0;
        sup[i] = 1.0;
        rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
    }
    match right {
        EndCondition::Natural => diag[n - 1] = 1.0,
        EndCondition::Clamped(d) => {
            sub[n - 1] = 1.0;
            diag[n - 1] = 2.0;
            rhs[n - 1] = 6.0 * (d - (y[n - 1] - y[n - 2]) / h) / h;
        }
    }
    // Thomas algorithm
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}
