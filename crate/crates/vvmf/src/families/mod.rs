//! Concrete families and reference instances.

mod builtin;
mod gamma03;
mod scan;

pub use builtin::{builtin_instance, BuiltinInstance, BUILTIN_NAMES};
pub use gamma03::{
    absorbed, agree_normalized, belyi_verify, coordinate_signs, f1_identities, f1_series, gamma03_abc,
    gamma03_abc_printed, gamma03_coordinates, gamma03_exponents, gamma03_family, gamma03_frobenius, gamma03_g,
    gamma03_h, gamma03_h_derived, gamma03_reducible, h_exponents, h_printed, h_printed_positions, h_rescale,
    permutations, wronskian, z1_series, z2_series, z_powers_symbolic, CoeffComparison, Gamma03Family, HReport,
    H_PERMUTATION,
};
pub use scan::{
    conformal_survivors, enumerate_tuples, evaluate_line_point, evaluate_tuple, gamma03_line_scan, line_lambdas,
    modular_rescale, named_target, quasi_conformal_survivors, rank4_scan, recognize_rational, target_verdict,
    CharacterCandidate, FamilyLine, LineVerdict, Neighborhood, ScanConfig, ScanDomain, ScanOutcome, ScanTarget,
    TargetVerdict, TupleSource, S_MATCH_TOL,
};

#[cfg(test)]
mod tests;
