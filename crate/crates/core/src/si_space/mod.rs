//! Shift-invariant spaces generated by finitely many compactly supported profiles.

pub mod dual;
pub mod function;
pub mod generator;
pub mod lattice;
pub mod quadrature;
pub mod symbol;

pub use dual::{compute_dual, DualGeneratorSet, FilteredSet};
pub use function::{CubeEnergy, GridFunction, SIFunction};
pub use generator::{GeneratorSet, GeneratorSpec, Profile};
pub use lattice::{Lattice, Window};
pub use quadrature::GridSpec;
pub use symbol::{frame_bounds, FrameBounds, LatticeFilter, SymbolFn};
