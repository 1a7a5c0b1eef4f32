pub mod diagrams;
pub mod gausscalc;
pub mod mollifier;
pub mod momentengine;
pub mod quad;
pub mod shesim;
pub mod simplexint;
pub mod specfun;
pub mod spline;
