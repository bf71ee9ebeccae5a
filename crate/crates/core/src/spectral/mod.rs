//! Torus grids, transforms, dyadic projections and differential operators.

pub mod cutoff;
pub mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod projection;

pub use cutoff::{lambda, CutoffKind, CutoffProfile};
pub use field::Field;
pub use grid::TorusGrid;
pub use ops::{
    correlation, dealias, divergence, divergence_defect, extrema, gradient, inner, integral, inverse_laplacian,
    laplacian, leray_project, lp_norm, refine,
};
pub use projection::{
    partition_defect, project_high, project_low, project_near, project_shell, ShellDecomposition,
};
