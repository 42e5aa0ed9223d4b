//! Constructive adversarial objects: the bump kernel, the sign-lattice
//! packing family, and the class-C mixture distribution, plus numerical
//! verification of their claimed properties. These serve as stress inputs
//! for the estimators and as a checkable embodiment of the gradient
//! packing that drives the information-theoretic analysis.

pub mod classc;
pub mod kernel;
pub mod packing;
pub mod verify;
