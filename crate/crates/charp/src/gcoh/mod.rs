//! Cohomology of finite groups and lattices.

mod alpha;
mod bar;
mod fox;
mod group;
mod hyperext;
mod lattice;
mod module;
mod semidirect;

pub use alpha::{
    alpha2_value, alpha_class, alpha_coefficients, alpha_p2, borel_groups,
    borel_twisted_character_sqrt5, chi1_comparison, chi1_invariant_complex, conjugation_action,
    determinant, integral_chain_p2, push_to_twist, restrict_to_generators, sl2, torus_generators,
    trivial_matrix_group, twist_invariant_complex, unipotent_generators, AlphaClass, AlphaModel,
    Chi1Comparison, IntegralChain,
};
pub use bar::{
    bar_cohomology, bar_cohomology_dims, cyclic_cohomology_dims, group_bockstein, BarComplex,
    DEFAULT_MAX_COCHAINS,
};
pub use fox::{
    borel_character_sqrt5, borel_natural_sqrt5, borel_presentation_sqrt5, borel_twisted_sqrt5,
    epsilon, galois, sqrt5_ring_mod2, sqrt5_ring_mod4, FoxComplex, Letter, Presentation,
};
pub use group::{FiniteGroup, MatrixGroup};
pub use hyperext::{hyperext_class, induced_on_cohomology, EquivariantComplex, HyperextClass};
pub use lattice::{koszul_complex, lattice_cohomology};
pub use module::{intertwiners, invariant_basis, GModule, LatticeModule};
pub use semidirect::{semidirect_reduce, InvariantComplex};
