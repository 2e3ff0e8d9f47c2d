/// Scalar type the numeric core is generic over: a real field with the
/// decompositions nalgebra provides (SVD, symmetric eigen, Cholesky) plus
/// conversion from `f64` literals for tolerances and physical constants.
///
/// Implemented by `f32` and `f64`. Exact or rational scalars do not qualify:
/// the decompositions need `sqrt` and a machine epsilon.
pub trait Scalar: nalgebra::RealField + Copy + num_traits::FromPrimitive {}

impl<T> Scalar for T where T: nalgebra::RealField + Copy + num_traits::FromPrimitive {}
