//! Single-qubit channel protocols from polyhedral Bloch-sphere encodings.
//!
//! The first party encodes its k bits as one of 2^k qubit states; each relay
//! applies a fixed unitary (a Bloch rotation) iff its own bit is 1 and
//! forwards the qubit.  With vertices of a suitable polyhedron as the state
//! set and rotations that permute those vertices, the chain reaches the same
//! state set as a one-encoder protocol for a relabelled input string, so the
//! guesser can reuse the one-encoder measurements.
//!
//! Two constructions are provided: a (4,2) protocol on the 14 vertices of the
//! tetrakis hexahedron (cube ∪ octahedron) and a (6,3) protocol on the 32
//! vertices of the pentakis dodecahedron (icosahedron ∪ dodecahedron).

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::classical;
use crate::quantum::{
    apply_matrix, basis_along, matrix_mul, rotation_matrix, Axis, Basis1Q, BlochVector,
};
use crate::task::{BitString, Error, RacScenario, RacTask, Rational, Result};
use crate::TOL_GEOM;

const IDENTITY3: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PolyhedronName {
    TetrakisHexahedron,
    PentakisDodecahedron,
}

impl PolyhedronName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolyhedronName::TetrakisHexahedron => "tetrakis-hexahedron",
            PolyhedronName::PentakisDodecahedron => "pentakis-dodecahedron",
        }
    }
}

/// A base string→vertex assignment on a polyhedron.
#[derive(Clone, Debug)]
pub struct PolyhedralEncoding {
    pub name: PolyhedronName,
    pub vertex_set: Vec<BlochVector>,
    pub assignment: BTreeMap<BitString, BlochVector>,
    /// Strings whose vertex is unconstrained (their ideal direction is
    /// degenerate, so any state performs equally).
    pub free_strings: Vec<BitString>,
}

/// One Bloch rotation per relay party, applied in relay order.
#[derive(Clone, Debug)]
pub struct RelayUnitaries {
    pub rotations: Vec<(Axis, f64)>, // (axis, degrees)
}

impl RelayUnitaries {
    pub fn tetrakis() -> Self {
        RelayUnitaries {
            rotations: vec![(Axis::Y, 90.0), (Axis::Z, 90.0)],
        }
    }

    pub fn pentakis() -> Self {
        RelayUnitaries {
            rotations: vec![(Axis::X, 180.0), (Axis::Y, 180.0), (Axis::Z, 180.0)],
        }
    }

    pub fn matrix(&self, i: usize) -> [[f64; 3]; 3] {
        let (axis, deg) = self.rotations[i];
        rotation_matrix(axis, deg.to_radians())
    }

    /// Composite rotation for the given relay bits, earliest relay applied
    /// first.
    pub fn composite(&self, relay_bits: &[u8]) -> [[f64; 3]; 3] {
        assert_eq!(relay_bits.len(), self.rotations.len());
        let mut m = IDENTITY3;
        for (i, &b) in relay_bits.iter().enumerate() {
            if b == 1 {
                m = matrix_mul(&self.matrix(i), &m);
            }
        }
        m
    }

    /// Number of distinct composite rotations over all relay-bit patterns,
    /// compared by action on Bloch vectors.
    pub fn composite_set_size(&self) -> usize {
        let r = self.rotations.len();
        let mut distinct: Vec<[[f64; 3]; 3]> = Vec::new();
        for bits in 0..1u32 << r {
            let pattern: Vec<u8> = (0..r).map(|i| ((bits >> (r - 1 - i)) & 1) as u8).collect();
            let m = self.composite(&pattern);
            let close = |a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]| {
                a.iter()
                    .flatten()
                    .zip(b.iter().flatten())
                    .all(|(x, y)| (x - y).abs() < TOL_GEOM)
            };
            if !distinct.iter().any(|d| close(d, &m)) {
                distinct.push(m);
            }
        }
        distinct.len()
    }

    /// Order of the group generated by the relay unitaries in SU(2), global
    /// phases kept.  For the 180° rotations the generators are −iσ_axis and
    /// the closure is the order-8 quaternion group, even though the
    /// composites collapse pairwise as Bloch rotations (RxRy = Rz).
    pub fn su2_group_order(&self) -> usize {
        type M2 = [[num_complex::Complex64; 2]; 2];
        let mul = |a: &M2, b: &M2| -> M2 {
            let mut out = [[num_complex::Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            out
        };
        let close = |a: &M2, b: &M2| {
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .all(|(x, y)| (x - y).norm() < TOL_GEOM)
        };
        let gens: Vec<M2> = self
            .rotations
            .iter()
            .map(|&(axis, deg)| {
                let h = deg.to_radians() / 2.0;
                let c = num_complex::Complex64::new(h.cos(), 0.0);
                let s = num_complex::Complex64::new(h.sin(), 0.0);
                let mi = num_complex::Complex64::new(0.0, -1.0);
                let zero = num_complex::Complex64::new(0.0, 0.0);
                match axis {
                    Axis::X => [[c, mi * s], [mi * s, c]],
                    Axis::Y => [[c, -s], [s, c]],
                    Axis::Z => [[c + mi * s, zero], [zero, c - mi * s]],
                }
            })
            .collect();
        let one = num_complex::Complex64::new(1.0, 0.0);
        let zero = num_complex::Complex64::new(0.0, 0.0);
        let mut group: Vec<M2> = vec![[[one, zero], [zero, one]]];
        let mut frontier = group.clone();
        while !frontier.is_empty() && group.len() < 1024 {
            let mut next = Vec::new();
            for f in &frontier {
                for g in &gens {
                    let m = mul(g, f);
                    if !group.iter().any(|h| close(h, &m)) {
                        group.push(m);
                        next.push(m);
                    }
                }
            }
            frontier = next;
        }
        group.len()
    }
}

/// Bijective relabelling x → x′ of n-bit strings.
#[derive(Clone, Debug)]
pub struct RemapTable {
    n: u8,
    map: Vec<u32>,
}

impl RemapTable {
    pub fn new(n: u8, map: Vec<u32>) -> Result<Self> {
        let count = 1usize << n;
        if map.len() != count {
            return Err(Error::ShapeMismatch(format!(
                "remap needs {count} rows, got {}",
                map.len()
            )));
        }
        let mut seen = vec![false; count];
        for &v in &map {
            if (v as usize) >= count || seen[v as usize] {
                return Err(Error::VerificationMismatch(format!(
                    "remap is not a bijection on {n}-bit strings"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(RemapTable { n, map })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.map[x as usize]
    }

    pub fn inverse(&self) -> RemapTable {
        let mut inv = vec![0u32; self.map.len()];
        for (x, &xp) in self.map.iter().enumerate() {
            inv[xp as usize] = x as u32;
        }
        RemapTable { n: self.n, map: inv }
    }

    /// Task recovering bits of the relabelled string: f(x, y) = remap(x)_y.
    pub fn forward_task(&self, k: u8) -> Result<RacTask> {
        let scenario = RacScenario::new(self.n, k)?;
        let map = self.map.clone();
        let n = self.n;
        Ok(RacTask::from_fn(scenario, move |x, y| {
            ((map[x as usize] >> (n - 1 - y)) & 1) as u8
        }))
    }

    /// Task where the parties hold the relabelled string and recover the
    /// original: f(x, y) = remap⁻¹(x)_y.
    pub fn relabelled_task(&self, k: u8) -> Result<RacTask> {
        self.inverse().forward_task(k)
    }
}

impl Serialize for RemapTable {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row {
            from: String,
            to: String,
        }
        let rows: Vec<Row> = self
            .map
            .iter()
            .enumerate()
            .map(|(x, &xp)| Row {
                from: BitString::new(self.n, x as u32).expect("in range").to_string(),
                to: BitString::new(self.n, xp).expect("in range").to_string(),
            })
            .collect();
        rows.serialize(ser)
    }
}

/// 6 octahedron vertices (±axes) followed by 8 normalized cube corners.
pub fn tetrakis_vertices() -> Vec<BlochVector> {
    let mut v = Vec::with_capacity(14);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut u = [0.0; 3];
            u[axis] = sign;
            v.push(BlochVector(u));
        }
    }
    let s = 1.0 / 3f64.sqrt();
    for &x in &[s, -s] {
        for &y in &[s, -s] {
            for &z in &[s, -s] {
                v.push(BlochVector([x, y, z]));
            }
        }
    }
    v
}

fn cyclic(v: [f64; 3]) -> [[f64; 3]; 3] {
    [v, [v[2], v[0], v[1]], [v[1], v[2], v[0]]]
}

/// 12 icosahedron vertices followed by the 20 dodecahedron vertices
/// (8 cube corners, then 12 from the (0, ±φ, ±1/φ) cyclic family), all
/// unit-normalized.
pub fn pentakis_vertices() -> Vec<BlochVector> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut out = Vec::with_capacity(32);
    for &a in &[1.0, -1.0] {
        for &b in &[phi, -phi] {
            for u in cyclic([0.0, a, b]) {
                out.push(BlochVector(u).normalized().expect("nonzero"));
            }
        }
    }
    let s = 1.0 / 3f64.sqrt();
    for &x in &[s, -s] {
        for &y in &[s, -s] {
            for &z in &[s, -s] {
                out.push(BlochVector([x, y, z]));
            }
        }
    }
    for &a in &[1.0 / phi, -1.0 / phi] {
        for &b in &[phi, -phi] {
            for u in cyclic([0.0, b, a]) {
                out.push(BlochVector(u).normalized().expect("nonzero"));
            }
        }
    }
    out
}

/// First representative of each antipodal icosahedron pair, in vertex order.
pub fn icosahedron_axes() -> Vec<BlochVector> {
    let ico = &pentakis_vertices()[..12];
    let mut axes: Vec<BlochVector> = Vec::new();
    for v in ico {
        if !axes
            .iter()
            .any(|a| a.distance(v) < TOL_GEOM || a.distance(&v.neg()) < TOL_GEOM)
        {
            axes.push(*v);
        }
    }
    axes
}

fn min_chord(vertices: &[BlochVector]) -> f64 {
    let mut min = f64::INFINITY;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            min = min.min(a.distance(b));
        }
    }
    min
}

/// Index of the vertex matching `u`, after asserting the vertex set is well
/// separated so nearest-vertex matching is unambiguous.
fn vertex_index(vertices: &[BlochVector], u: &BlochVector) -> Result<usize> {
    for (i, v) in vertices.iter().enumerate() {
        if v.distance(u) < 1e-7 {
            return Ok(i);
        }
    }
    Err(Error::SearchFailure(format!(
        "point ({:.6}, {:.6}, {:.6}) matches no vertex",
        u.0[0], u.0[1], u.0[2]
    )))
}

/// Ideal Bloch direction of a string under axes d_y: normalize Σ_y (−1)^{s_y} d_y.
fn bloch_sum(axes: &[BlochVector], s: u32, n: u8) -> Option<BlochVector> {
    let mut acc = BlochVector([0.0; 3]);
    for (y, d) in axes.iter().enumerate() {
        let sign = if (s >> (n as usize - 1 - y)) & 1 == 1 {
            -1.0
        } else {
            1.0
        };
        acc = acc.add(&d.scale(sign));
    }
    acc.normalized()
}

/// A complete relay protocol: initial states, relay rotations, the induced
/// relabelling, and the guesser's measurement directions.
#[derive(Clone, Debug)]
pub struct Construction {
    pub scenario: RacScenario,
    pub encoding: PolyhedralEncoding,
    /// Initial state for each first-party input, indexed by its value.
    pub initial: Vec<BlochVector>,
    pub unitaries: RelayUnitaries,
    pub remap: RemapTable,
    /// Measurement direction d_y per query.
    pub measurements: Vec<BlochVector>,
}

/// Final state of the chain on input x: the initial state for the first k
/// bits, rotated by each relay whose bit is 1.
pub fn run_protocol(
    initial: &[BlochVector],
    unitaries: &RelayUnitaries,
    x: &BitString,
) -> BlochVector {
    let k = x.len() as usize - unitaries.rotations.len();
    let a = (x.value() >> unitaries.rotations.len()) as usize;
    let mut v = initial[a];
    for i in 0..unitaries.rotations.len() {
        if x.get((k + i) as u8) == 1 {
            v = apply_matrix(&unitaries.matrix(i), &v);
        }
    }
    v
}

/// Optimal per-query measurement directions for a state ensemble: the
/// average success for query y is maximized along
/// d_y = normalize(Σ_x (−1)^{f(x,y)} r(x)).
pub fn optimal_directions(
    states: &[(u32, BlochVector)],
    task: &RacTask,
) -> Result<Vec<BlochVector>> {
    let n = task.scenario().n;
    (0..n)
        .map(|y| {
            let mut acc = BlochVector([0.0; 3]);
            for &(x, r) in states {
                let sign = if task.value(x, y) == 1 { -1.0 } else { 1.0 };
                acc = acc.add(&r.scale(sign));
            }
            acc.normalized().ok_or(Error::DegenerateDirection(y))
        })
        .collect()
}

/// Measurement bases along [`optimal_directions`].
pub fn optimal_measurements(states: &[(u32, BlochVector)], task: &RacTask) -> Result<Vec<Basis1Q>> {
    Ok(optimal_directions(states, task)?
        .iter()
        .map(basis_along)
        .collect())
}

/// Average success of measuring along `dirs`: the guess for query y is the
/// outcome of the d_y measurement, correct with probability
/// (1 + (−1)^{f(x,y)} d_y·r(x))/2.
pub fn protocol_success(
    states: &[(u32, BlochVector)],
    dirs: &[BlochVector],
    task: &RacTask,
) -> f64 {
    let sc = task.scenario();
    let mut total = 0.0;
    for &(x, r) in states {
        for y in 0..sc.n {
            let sign = if task.value(x, y) == 1 { -1.0 } else { 1.0 };
            total += (1.0 + sign * dirs[y as usize].dot(&r)) / 2.0;
        }
    }
    total / sc.pair_count() as f64
}

/// Exact classical optimum of a task (delegates to the strategy enumeration).
pub fn classical_value(task: &RacTask, cap: u128) -> Result<Rational> {
    Ok(classical::enumerate_optimal(task, cap)?.score)
}

// ---------------------------------------------------------------------------
// (4,2) construction on the tetrakis hexahedron
// ---------------------------------------------------------------------------

/// Input-string relabelling of the (4,2) protocol: x → x′ pairs, where x
/// drives the parties and x′ is the string whose bits the final state
/// encodes.  Used as the constraint set when searching for the base
/// assignment; the recovered remap is checked against it.
pub const TETRAKIS_REMAP_PAIRS: [(&str, &str); 16] = [
    ("0000", "0011"),
    ("0001", "0000"),
    ("0010", "0101"),
    ("0011", "0110"),
    ("0100", "0111"),
    ("0101", "0010"),
    ("0110", "0100"),
    ("0111", "1110"),
    ("1000", "1000"),
    ("1001", "1101"),
    ("1010", "1011"),
    ("1011", "0001"),
    ("1100", "1100"),
    ("1101", "1111"),
    ("1110", "1010"),
    ("1111", "1001"),
];

fn tetrakis_constraint_map() -> Vec<u32> {
    let mut map = vec![0u32; 16];
    for (from, to) in TETRAKIS_REMAP_PAIRS {
        map[BitString::parse(from).expect("valid").value() as usize] =
            BitString::parse(to).expect("valid").value();
    }
    map
}

/// Search for the (4,2) construction: find an ordered 4-tuple of cube
/// diagonals, summing to zero, such that the ideal directions of the
/// relabelled strings form an orbit of the relay rotations over the four
/// initial states.  The constraint map fixes everything except the two
/// strings whose ideal direction is degenerate.
pub fn tetrakis_construction() -> Result<Construction> {
    let vertices = tetrakis_vertices();
    let unitaries = RelayUnitaries::tetrakis();
    let constraint = tetrakis_constraint_map();
    let diagonals: Vec<BlochVector> = vertices[6..14].to_vec();

    let mut best_axes: Option<Vec<BlochVector>> = None;
    let mut best_satisfied = 0usize;
    let mut best_report = String::new();
    'tuples: for pick in ordered_tuples(8, 4) {
        let axes: Vec<BlochVector> = pick.iter().map(|&i| diagonals[i]).collect();
        let sum = axes
            .iter()
            .fold(BlochVector([0.0; 3]), |acc, d| acc.add(d));
        if sum.norm() > TOL_GEOM {
            continue;
        }
        let mut satisfied = 0usize;
        for x in 0..16u32 {
            let xp = constraint[x as usize];
            let target = match bloch_sum(&axes, xp, 4) {
                Some(t) => t,
                None => continue, // free string, no constraint
            };
            let init_xp = constraint[(x & 0b1100) as usize];
            let init = match bloch_sum(&axes, init_xp, 4) {
                Some(v) => v,
                None => continue 'tuples,
            };
            let mut got = init;
            if (x >> 1) & 1 == 1 {
                got = apply_matrix(&unitaries.matrix(0), &got);
            }
            if x & 1 == 1 {
                got = apply_matrix(&unitaries.matrix(1), &got);
            }
            if got.distance(&target) < TOL_GEOM {
                satisfied += 1;
            }
        }
        if satisfied == 14 {
            best_axes = Some(axes);
            break;
        }
        if satisfied > best_satisfied {
            best_satisfied = satisfied;
            best_report = format!(
                "closest diagonal tuple {:?} satisfies {satisfied}/14 orbit constraints",
                pick
            );
        }
    }
    let axes = best_axes.ok_or_else(|| {
        Error::SearchFailure(format!(
            "no zero-sum diagonal 4-tuple is orbit-consistent; {best_report}"
        ))
    })?;

    build_construction(
        PolyhedronName::TetrakisHexahedron,
        RacScenario::new(4, 2)?,
        vertices,
        axes,
        unitaries,
        None,
    )
}

// ---------------------------------------------------------------------------
// (6,3) construction on the pentakis dodecahedron
// ---------------------------------------------------------------------------

/// Host-pair orientation for the (6,3) relabelling.  Every vertex hosts two
/// strings and receives two inputs, leaving one binary choice per vertex;
/// bit j of this constant swaps the pair at vertex j.  The value is
/// calibrated so the relabelled task's classical optimum is exactly 5/8.
pub const PENTAKIS_PAIRING: u32 = 0x2000_c298;

/// Build the (6,3) construction: hosts from ideal directions, initial states
/// from the orbit structure of the 180° rotations, and the relabelling from
/// matching inputs to hosts vertex by vertex.
pub fn pentakis_construction() -> Result<Construction> {
    let vertices = pentakis_vertices();
    let unitaries = RelayUnitaries::pentakis();
    let axes = icosahedron_axes();
    if axes.len() != 6 {
        return Err(Error::SearchFailure(format!(
            "expected 6 antipodal axes, found {}",
            axes.len()
        )));
    }
    build_construction(
        PolyhedronName::PentakisDodecahedron,
        RacScenario::new(6, 3)?,
        vertices,
        axes,
        unitaries,
        Some(PENTAKIS_PAIRING),
    )
}

/// Shared assembly: host assignment from ideal directions, initial-state
/// search, induced remap, measurements, and cross-checks.
fn build_construction(
    name: PolyhedronName,
    scenario: RacScenario,
    vertices: Vec<BlochVector>,
    axes: Vec<BlochVector>,
    unitaries: RelayUnitaries,
    pairing: Option<u32>,
) -> Result<Construction> {
    let n = scenario.n;
    let k = scenario.k;
    let count = scenario.input_count();
    let chord = min_chord(&vertices);
    if chord < 0.6 {
        return Err(Error::VerificationMismatch(format!(
            "vertex set too dense for nearest-vertex matching (min chord {chord:.3})"
        )));
    }

    // base assignment: each non-degenerate string sits at its ideal direction
    let mut host: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
    let mut assignment = BTreeMap::new();
    let mut degenerate: Vec<u32> = Vec::new();
    for xp in 0..count {
        match bloch_sum(&axes, xp, n) {
            Some(w) => {
                let vi = vertex_index(&vertices, &w)?;
                host[vi].push(xp);
                assignment.insert(BitString::new(n, xp)?, vertices[vi]);
            }
            None => degenerate.push(xp),
        }
    }

    let (initial, remap_vec, free_strings) = match pairing {
        None => tetrakis_assemble(&vertices, &axes, &unitaries, &host, &degenerate)?,
        Some(pb) => pentakis_assemble(&vertices, &unitaries, &host, pb)?,
    };

    let remap = RemapTable::new(n, remap_vec)?;
    let encoding = PolyhedralEncoding {
        name,
        vertex_set: vertices,
        assignment,
        free_strings,
    };

    // cross-check: re-derive the measurement directions from the final
    // states via the ideal-direction rule and compare to the axes; free
    // inputs are excluded since their target contributes no constraint
    let task = remap.forward_task(k)?;
    let free: Vec<u32> = encoding.free_strings.iter().map(|s| s.value()).collect();
    let states: Vec<(u32, BlochVector)> = (0..count)
        .filter(|x| !free.contains(x))
        .map(|x| {
            let xb = BitString::new(n, x).expect("in range");
            (x, run_protocol(&initial, &unitaries, &xb))
        })
        .collect();
    let derived = optimal_directions(&states, &task)?;
    for (y, d) in derived.iter().enumerate() {
        let a = &axes[y];
        if d.distance(a) > TOL_GEOM && d.distance(&a.neg()) > TOL_GEOM {
            return Err(Error::VerificationMismatch(format!(
                "re-derived measurement direction for y={y} leaves its axis"
            )));
        }
    }

    Ok(Construction {
        scenario,
        encoding,
        initial,
        unitaries,
        remap,
        measurements: axes,
    })
}

/// Tetrakis assembly: initial states are the ideal directions of the four
/// strings with zero relay bits; the remap is recovered by matching each
/// input's final vertex to the string hosted there.  Strings with degenerate
/// ideal directions are free and absorb the unmatched inputs in ascending
/// order.
fn tetrakis_assemble(
    vertices: &[BlochVector],
    axes: &[BlochVector],
    unitaries: &RelayUnitaries,
    host: &[Vec<u32>],
    degenerate: &[u32],
) -> Result<(Vec<BlochVector>, Vec<u32>, Vec<BitString>)> {
    let constraint = tetrakis_constraint_map();
    let initial: Vec<BlochVector> = (0..4u32)
        .map(|a| {
            bloch_sum(axes, constraint[(a << 2) as usize], 4)
                .ok_or_else(|| Error::SearchFailure("degenerate initial state".into()))
        })
        .collect::<Result<Vec<_>>>()?;

    // All 14 vertices are occupied, so an input's final vertex alone cannot
    // tell a constrained string from a free one: the two free inputs land on
    // vertices that already host another string.  Recover the remap from the
    // constraint map, re-verifying that each constrained input's final
    // vertex is the one hosting its target string; the free inputs (those
    // whose target's ideal direction is degenerate) absorb the degenerate
    // strings in ascending order.
    let mut remap = vec![u32::MAX; 16];
    let mut free_x: Vec<u32> = Vec::new();
    for x in 0..16u32 {
        let xp = constraint[x as usize];
        if degenerate.contains(&xp) {
            free_x.push(x);
            continue;
        }
        let xb = BitString::new(4, x)?;
        let v = run_protocol(&initial, unitaries, &xb);
        let vi = vertex_index(vertices, &v)?;
        if !host[vi].contains(&xp) {
            return Err(Error::VerificationMismatch(format!(
                "input {x:04b} reaches vertex {vi}, which does not host its target"
            )));
        }
        remap[x as usize] = xp;
    }
    if free_x.len() != degenerate.len() {
        return Err(Error::SearchFailure(format!(
            "{} free inputs but {} degenerate strings",
            free_x.len(),
            degenerate.len()
        )));
    }
    for (&x, &xp) in free_x.iter().zip(degenerate.iter()) {
        remap[x as usize] = xp;
    }
    let free_strings = free_x
        .iter()
        .map(|&x| BitString::new(4, x))
        .collect::<Result<Vec<_>>>()?;
    Ok((initial, remap, free_strings))
}

/// Pentakis assembly: initial states are one representative per orbit of the
/// three 180° rotations; every vertex receives exactly two inputs and hosts
/// exactly two strings, and the pairing constant orients each host pair.
fn pentakis_assemble(
    vertices: &[BlochVector],
    unitaries: &RelayUnitaries,
    host: &[Vec<u32>],
    pairing: u32,
) -> Result<(Vec<BlochVector>, Vec<u32>, Vec<BitString>)> {
    for (vi, h) in host.iter().enumerate() {
        if h.len() != 2 {
            return Err(Error::VerificationMismatch(format!(
                "vertex {vi} hosts {} strings, expected 2",
                h.len()
            )));
        }
    }
    // orbit representatives under {I, Rx, Ry, Rz}
    let rots: Vec<[[f64; 3]; 3]> = (0..3).map(|i| unitaries.matrix(i)).collect();
    let mut seen = vec![false; vertices.len()];
    let mut reps: Vec<usize> = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut orbit = vec![i];
        for r in &rots {
            orbit.push(vertex_index(vertices, &apply_matrix(r, v))?);
        }
        orbit.sort_unstable();
        orbit.dedup();
        for &j in &orbit {
            seen[j] = true;
        }
        reps.push(orbit[0]);
    }
    if reps.len() != 8 {
        return Err(Error::SearchFailure(format!(
            "expected 8 rotation orbits, found {}",
            reps.len()
        )));
    }
    reps.sort_unstable();
    let initial: Vec<BlochVector> = reps.iter().map(|&i| vertices[i]).collect();

    // final vertex per input; each vertex must receive exactly two
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
    for x in 0..64u32 {
        let xb = BitString::new(6, x)?;
        let v = run_protocol(&initial, unitaries, &xb);
        incoming[vertex_index(vertices, &v)?].push(x);
    }
    let mut remap = vec![0u32; 64];
    for (vi, inc) in incoming.iter().enumerate() {
        if inc.len() != 2 {
            return Err(Error::VerificationMismatch(format!(
                "vertex {vi} receives {} inputs, expected 2",
                inc.len()
            )));
        }
        let (mut s0, mut s1) = (
            *host[vi].iter().min().expect("two hosts"),
            *host[vi].iter().max().expect("two hosts"),
        );
        if (pairing >> vi) & 1 == 1 {
            std::mem::swap(&mut s0, &mut s1);
        }
        remap[inc[0] as usize] = s0;
        remap[inc[1] as usize] = s1;
    }
    Ok((initial, remap, Vec::new()))
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Evaluation summary for one construction: quantum value, classical optima
/// of the relabelled task in both reading directions, and the one-encoder
/// baseline of the standard task for comparison.
#[derive(Clone, Debug)]
pub struct QracReport {
    pub name: PolyhedronName,
    pub n: u8,
    pub k: u8,
    pub quantum_value: f64,
    /// Classical optimum when the parties hold the relabelled string and
    /// recover the original (the headline baseline).
    pub classical_value: Rational,
    /// Classical optimum in the protocol's own direction (parties hold x,
    /// recover remap(x)).
    pub classical_forward: Rational,
    /// One-encoder classical optimum of the standard n-bit task.
    pub standard_classical: Rational,
    pub composite_set_size: usize,
    pub su2_group_order: usize,
}

impl QracReport {
    pub fn gap_multiparty(&self) -> f64 {
        self.quantum_value - self.classical_value.to_f64()
    }

    pub fn gap_standard(&self) -> f64 {
        self.quantum_value - self.standard_classical.to_f64()
    }
}

impl Serialize for QracReport {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("QracReport", 11)?;
        s.serialize_field("construction", self.name.as_str())?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("quantum_value", &self.quantum_value)?;
        s.serialize_field("classical_value", &self.classical_value)?;
        s.serialize_field("classical_forward", &self.classical_forward)?;
        s.serialize_field("standard_classical", &self.standard_classical)?;
        s.serialize_field("gap_multiparty", &self.gap_multiparty())?;
        s.serialize_field("gap_standard", &self.gap_standard())?;
        s.serialize_field("composite_set_size", &self.composite_set_size)?;
        s.serialize_field("su2_group_order", &self.su2_group_order)?;
        s.end()
    }
}

/// Final-state ensemble of a construction, keyed by input value.
pub fn construction_states(c: &Construction) -> Vec<(u32, BlochVector)> {
    (0..c.scenario.input_count())
        .map(|x| {
            let xb = BitString::new(c.scenario.n, x).expect("in range");
            (x, run_protocol(&c.initial, &c.unitaries, &xb))
        })
        .collect()
}

/// Quantum value of a construction on its forward task.
pub fn construction_quantum_value(c: &Construction) -> Result<f64> {
    let task = c.remap.forward_task(c.scenario.k)?;
    Ok(protocol_success(
        &construction_states(c),
        &c.measurements,
        &task,
    ))
}

/// Full evaluation of a construction, including the classical baselines.
pub fn construction_report(c: &Construction, cap: u128) -> Result<QracReport> {
    let quantum_value = construction_quantum_value(c)?;
    let relabelled = classical_value(&c.remap.relabelled_task(c.scenario.k)?, cap)?;
    let classical_forward = classical_value(&c.remap.forward_task(c.scenario.k)?, cap)?;
    let standard_classical = classical::two_party_value(c.scenario.n)?;
    Ok(QracReport {
        name: c.encoding.name,
        n: c.scenario.n,
        k: c.scenario.k,
        quantum_value,
        classical_value: relabelled,
        classical_forward,
        standard_classical,
        composite_set_size: c.unitaries.composite_set_size(),
        su2_group_order: c.unitaries.su2_group_order(),
    })
}

/// JSON form of a construction's encoding data:
/// {n, k, unitaries, initial, remap}.
pub fn encoding_json(c: &Construction) -> serde_json::Value {
    let unitaries: Vec<serde_json::Value> = c
        .unitaries
        .rotations
        .iter()
        .map(|(axis, deg)| {
            serde_json::json!({
                "axis": match axis { Axis::X => "x", Axis::Y => "y", Axis::Z => "z" },
                "degrees": deg,
            })
        })
        .collect();
    let initial: Vec<serde_json::Value> = c
        .initial
        .iter()
        .enumerate()
        .map(|(a, v)| {
            serde_json::json!({
                "string": BitString::new(c.scenario.k, a as u32).expect("in range").to_string(),
                "bloch": [v.0[0], v.0[1], v.0[2]],
            })
        })
        .collect();
    serde_json::json!({
        "n": c.scenario.n,
        "k": c.scenario.k,
        "unitaries": unitaries,
        "initial": initial,
        "remap": c.remap,
    })
}

fn ordered_tuples(pool: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(len);
    fn rec(pool: usize, len: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for i in 0..pool {
            if !current.contains(&i) {
                current.push(i);
                rec(pool, len, current, out);
                current.pop();
            }
        }
    }
    rec(pool, len, &mut current, &mut out);
    out
}
