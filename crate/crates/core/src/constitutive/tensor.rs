use nalgebra::Matrix3;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

fn deviator(m: &Matrix3<f64>) -> Matrix3<f64> {
    let mut d = m - Matrix3::identity() * (m.trace() / 3.0);
    // closes the diagonal so the summed trace is exactly zero
    d[(2, 2)] = -(d[(0, 0)] + d[(1, 1)]);
    d
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

fn from_row_major(a: &[f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(a)
}

/// Symmetric phonon stress or strain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononTensor(Matrix3<f64>);

impl PhononTensor {
    pub fn zero() -> Self {
        Self(Matrix3::zeros())
    }

    /// Takes the symmetric part of `m`; the result is exactly symmetric.
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        let mut s = m;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let v = (m[(i, j)] + m[(j, i)]) * 0.5;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        Self(s)
    }

    pub fn from_row_major(a: &[f64; 9]) -> Self {
        Self::from_matrix(from_row_major(a))
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self(Matrix3::from_diagonal(&nalgebra::Vector3::new(a, b, c)))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn deviator(&self) -> Self {
        Self(deviator(&self.0))
    }

    pub fn ddot(&self, other: &Self) -> f64 {
        self.0.component_mul(&other.0).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, f: f64) -> Self {
        Self(self.0 * f)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0 - other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        row_major(&self.0)
    }
}

/// Phason stress or strain; no symmetry is imposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasonTensor(Matrix3<f64>);

impl PhasonTensor {
    pub fn zero() -> Self {
        Self(Matrix3::zeros())
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn from_row_major(a: &[f64; 9]) -> Self {
        Self(from_row_major(a))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn deviator(&self) -> Self {
        Self(deviator(&self.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, f: f64) -> Self {
        Self(self.0 * f)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0 - other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        row_major(&self.0)
    }
}

impl Serialize for PhononTensor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhononTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let a = <[f64; 9]>::deserialize(d)?;
        let m = from_row_major(&a);
        if m != m.transpose() {
            return Err(serde::de::Error::custom("phonon tensor must be symmetric"));
        }
        Ok(Self(m))
    }
}

impl Serialize for PhasonTensor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhasonTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let a = <[f64; 9]>::deserialize(d)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(serde::de::Error::custom("phason tensor entries must be finite"));
        }
        Ok(Self(from_row_major(&a)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressState {
    pub phonon: PhononTensor,
    pub phason: PhasonTensor,
}

impl StressState {
    pub fn zero() -> Self {
        Self {
            phonon: PhononTensor::zero(),
            phason: PhasonTensor::zero(),
        }
    }

    pub fn phonon_only(phonon: PhononTensor) -> Self {
        Self {
            phonon,
            phason: PhasonTensor::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainState {
    pub phonon: PhononTensor,
    pub phason: PhasonTensor,
}

impl StrainState {
    pub fn zero() -> Self {
        Self {
            phonon: PhononTensor::zero(),
            phason: PhasonTensor::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            phonon: self.phonon.add(&other.phonon),
            phason: self.phason.add(&other.phason),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            phonon: self.phonon.sub(&other.phonon),
            phason: self.phason.sub(&other.phason),
        }
    }
}
