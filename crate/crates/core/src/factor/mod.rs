//! Factorization f = B e^g of solutions, the converse construction of the
//! coefficient, Schwarzian calculus, local univalence near zeros, and the
//! admissibility and Riccati-transform suites.

pub mod admissibility;
pub mod factorization;
pub mod schwarzian;

pub use factorization::{
    construct_coefficient, extract_factorization, roundtrip_check, verify_interpolation,
    Factorization, FactorizationSummary, SpaceReport, DEFLATION_RHO,
};
pub use schwarzian::{
    doubling_ratios, local_univalence_check, local_univalence_radius, preschwarzian, schwarzian,
    schwarzian_at, schwarzian_report, LocalUnivalenceEntry, SchwarzianReport,
};
pub use admissibility::{
    admissibility_probe, coefficient_primitive, joint_verdict, riccati_transform, space_quantities,
    weighted_area_integral, zero_free_coefficient, zero_free_correspondence, AdmissibilitySuite,
    CatalogEntry, RiccatiTransformReport, SpaceGrids, SpaceTag, ZeroFreeReport,
};
