//! Minimal statevector engine for 1–3 qubit systems.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
//! the amplitude index.  Measurements return both Born branches with the
//! post-measurement state collapsed in place (measured qubit replaced by the
//! observed basis vector); zero-probability branches carry no post state.

use num_complex::Complex64;

use crate::task::{Error, Result};
use crate::TOL_EXACT;

pub type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Vec<C>,
}

impl StateVector {
    pub fn new(amps: Vec<C>) -> Result<Self> {
        let n = match amps.len() {
            2 => 1,
            4 => 2,
            8 => 3,
            len => {
                return Err(Error::InvalidParameter(format!(
                    "amplitude vector of length {len} is not a 1-3 qubit state"
                )))
            }
        };
        let _ = n;
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > TOL_EXACT {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(StateVector { amps })
    }

    pub fn qubit_count(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amps(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// The singlet (|01⟩ − |10⟩)/√2.
pub fn make_bell() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]).expect("normalized")
}

/// (|000⟩ + |111⟩)/√2.
pub fn make_ghz() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![c(0.0, 0.0); 8];
    amps[0] = c(s, 0.0);
    amps[7] = c(s, 0.0);
    StateVector::new(amps).expect("normalized")
}

/// An orthonormal single-qubit measurement basis; vector 0 is outcome 0.
#[derive(Clone, Debug)]
pub struct Basis1Q {
    v: [[C; 2]; 2],
}

impl Basis1Q {
    pub fn from_vectors(v0: [C; 2], v1: [C; 2]) -> Result<Self> {
        for v in [&v0, &v1] {
            let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if (n - 1.0).abs() > TOL_EXACT {
                return Err(Error::NotNormalized(n));
            }
        }
        let ip = v0[0].conj() * v1[0] + v0[1].conj() * v1[1];
        if ip.norm() > TOL_EXACT {
            return Err(Error::NotOrthonormal);
        }
        Ok(Basis1Q { v: [v0, v1] })
    }

    /// Basis with outcome-0 vector cos θ |0⟩ + sin θ e^{iφ} |1⟩ and
    /// outcome-1 vector sin θ |0⟩ − cos θ e^{iφ} |1⟩.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (ct, st) = (theta.cos(), theta.sin());
        let ph = C::from_polar(1.0, phi);
        Basis1Q {
            v: [
                [c(ct, 0.0), ph * st],
                [c(st, 0.0), -ph * ct],
            ],
        }
    }

    pub fn computational() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    pub fn plus_minus() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_4, 0.0)
    }

    /// σ_y eigenbasis; outcome 0 is (|0⟩ + i|1⟩)/√2.
    pub fn sigma_y() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2)
    }

    /// The same basis with outcome labels swapped.
    pub fn flipped(&self) -> Self {
        Basis1Q {
            v: [self.v[1], self.v[0]],
        }
    }

    pub fn vector(&self, outcome: u8) -> &[C; 2] {
        &self.v[outcome as usize & 1]
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub outcome: u8,
    pub probability: f64,
    /// Collapsed state (same qubit count); `None` marks a zero-probability
    /// branch whose state is not defined.
    pub post: Option<StateVector>,
}

/// Born-rule measurement of one qubit; returns both branches.
pub fn measure(state: &StateVector, qubit: usize, basis: &Basis1Q) -> Result<[MeasurementBranch; 2]> {
    let nq = state.qubit_count();
    if qubit >= nq {
        return Err(Error::InvalidParameter(format!(
            "qubit {qubit} out of range for {nq}-qubit state"
        )));
    }
    let norm2 = state.norm_sqr();
    if (norm2 - 1.0).abs() > TOL_EXACT {
        return Err(Error::NotNormalized(norm2));
    }
    let shift = nq - 1 - qubit; // bit position of the qubit in the index
    let dim = state.amps.len();
    let mut branches = Vec::with_capacity(2);
    for outcome in 0..2u8 {
        let v = basis.vector(outcome);
        // coefficient per configuration of the remaining qubits
        let mut post = vec![c(0.0, 0.0); dim];
        let mut prob = 0.0;
        for rest in 0..dim / 2 {
            let low = rest & ((1 << shift) - 1);
            let high = (rest >> shift) << (shift + 1);
            let i0 = high | low;
            let i1 = i0 | (1 << shift);
            let coeff = v[0].conj() * state.amps[i0] + v[1].conj() * state.amps[i1];
            prob += coeff.norm_sqr();
            post[i0] = v[0] * coeff;
            post[i1] = v[1] * coeff;
        }
        let post = if prob > 1e-15 {
            let s = prob.sqrt();
            for a in &mut post {
                *a /= s;
            }
            Some(StateVector { amps: post })
        } else {
            None
        };
        branches.push(MeasurementBranch {
            outcome,
            probability: prob.max(0.0),
            post,
        });
    }
    Ok([branches.remove(0), branches.remove(0)])
}

/// Real 3-vector on (or in) the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Option<BlochVector> {
        let n = self.norm();
        if n < 1e-9 {
            None
        } else {
            Some(BlochVector([self.0[0] / n, self.0[1] / n, self.0[2] / n]))
        }
    }

    pub fn neg(&self) -> BlochVector {
        BlochVector([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn add(&self, other: &BlochVector) -> BlochVector {
        BlochVector([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn scale(&self, s: f64) -> BlochVector {
        BlochVector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        self.add(&other.neg()).norm()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Right-handed rotation matrix about a coordinate axis.
pub fn rotation_matrix(axis: Axis, angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    match axis {
        Axis::X => [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        Axis::Y => [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        Axis::Z => [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

pub fn apply_matrix(m: &[[f64; 3]; 3], v: &BlochVector) -> BlochVector {
    let mut out = [0.0; 3];
    for (i, row) in m.iter().enumerate() {
        out[i] = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2];
    }
    BlochVector(out)
}

pub fn matrix_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Right-handed rotation of a Bloch vector about a coordinate axis.
pub fn rotate_bloch(v: &BlochVector, axis: Axis, angle: f64) -> BlochVector {
    apply_matrix(&rotation_matrix(axis, angle), v)
}

/// Pure state with the given Bloch vector:
/// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
pub fn bloch_to_state(v: &BlochVector) -> StateVector {
    let theta = v.0[2].clamp(-1.0, 1.0).acos();
    let phi = v.0[1].atan2(v.0[0]);
    let a0 = c((theta / 2.0).cos(), 0.0);
    let a1 = C::from_polar((theta / 2.0).sin(), phi);
    let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    StateVector {
        amps: vec![a0 / norm, a1 / norm],
    }
}

/// Bloch vector of a single-qubit pure state.
pub fn state_to_bloch(s: &StateVector) -> Result<BlochVector> {
    if s.qubit_count() != 1 {
        return Err(Error::InvalidParameter(
            "state_to_bloch needs a single qubit".into(),
        ));
    }
    let (a, b) = (s.amps[0], s.amps[1]);
    let x = 2.0 * (a.conj() * b).re;
    let y = 2.0 * (a.conj() * b).im;
    let z = a.norm_sqr() - b.norm_sqr();
    Ok(BlochVector([x, y, z]))
}

/// |⟨a|b⟩|² for equal-dimension states.
pub fn state_overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.amps.len() != b.amps.len() {
        return Err(Error::InvalidParameter(
            "overlap of states with different qubit counts".into(),
        ));
    }
    let ip: C = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(ip.norm_sqr())
}

/// Overlap of the pure states with Bloch vectors u and v: (1 + u·v)/2.
pub fn bloch_overlap(u: &BlochVector, v: &BlochVector) -> f64 {
    (1.0 + u.dot(v)) / 2.0
}

/// Measurement basis whose outcome 0 points along the Bloch direction `v`.
pub fn basis_along(v: &BlochVector) -> Basis1Q {
    let plus = bloch_to_state(v);
    let minus = bloch_to_state(&v.neg());
    Basis1Q {
        v: [
            [plus.amps[0], plus.amps[1]],
            [minus.amps[0], minus.amps[1]],
        ],
    }
}
