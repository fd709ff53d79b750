//! Conserved charges `H1..H4` and the auxiliary `J2..J4` acting on Bethe
//! wavefunctions: eigenvalues, interior actions, boundary conditions and the
//! regularized `G4` defect.

mod boundary;
mod free;
mod g4;

pub use boundary::{
    boundary_residual_h2, boundary_residual_j3, boundary_residual_j4, bracket, J4Residual,
};
pub use free::{
    apply_free_part, apply_free_part_to, charge_eigenvalue, composition_identity_check,
    composition_operator_residual, interior_residual, ChargeEigenvalue, ChargeName,
    CompositionReport, FreeChargeSpec,
};
pub use g4::{
    box_norm_sq, default_widths, g4_defect, g4_defect_scan, pair_delta_overlap,
    pair_delta_overlap_normalized, G4Scan, G4ScanConfig, G4ScanPoint,
};
