//! Linear and total-Lagrangian nonlinear FEM kernels for bilinear quads under
//! plane stress, with design-variable parameterization of the assembled
//! systems.
//!
//! Voigt ordering is (11, 22, 12) with engineering shear strain throughout.

pub mod assembly;
pub mod element;
pub mod material;

pub use assembly::{DofMap, ElementStates, GlobalAssembler, ParameterizedStructure};
pub use element::{ElementKernel, ElementMatrix, ElementTangent, ElementVector};
pub use material::{lame, linear_elastic_d, plane_stress_neo_hookean, Material, PlaneStressState};
