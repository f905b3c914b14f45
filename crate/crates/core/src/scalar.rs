use ndarray::NdFloat;
use num_traits::FromPrimitive;
use safetensors::Dtype;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point element type for models and metrics.
///
/// Implemented for `f32` and `f64`. Besides arithmetic it carries what the
/// classifier needs beyond [`num_traits::Float`]: the error function for
/// exact GELU and a little-endian byte codec for checkpoint files.
pub trait Scalar: NdFloat + FromPrimitive + Default + Serialize + DeserializeOwned {
    const DTYPE: Dtype;
    const BYTES: usize;

    fn erf(self) -> Self;
    fn extend_le_bytes(self, out: &mut Vec<u8>);
    fn from_le_slice(bytes: &[u8]) -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

impl Scalar for f32 {
    const DTYPE: Dtype = Dtype::F32;
    const BYTES: usize = 4;

    fn erf(self) -> Self {
        libm::erff(self)
    }

    fn extend_le_bytes(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Scalar for f64 {
    const DTYPE: Dtype = Dtype::F64;
    const BYTES: usize = 8;

    fn erf(self) -> Self {
        libm::erf(self)
    }

    fn extend_le_bytes(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}
