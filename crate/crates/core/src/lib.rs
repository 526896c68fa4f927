pub mod coding;
pub mod descriptor;
pub mod error;
pub mod interval;
pub mod minus_cf;
pub mod quadratic;
pub mod shift;
pub mod potential;
pub mod series;
pub mod spectral;
pub mod pressure;
pub mod measures;
pub mod flow;
