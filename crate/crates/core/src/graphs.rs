//! Labeled graph states: stabilizers, local complementation, LC-orbit search
//! and fusion plans built from multi-qubit entangling gates.
//!
//! Vertex `v` is qubit `v`; in statevectors qubit 0 is the most significant
//! bit, matching the register convention of [`crate::gates`].
//!
//! Entangle steps are applied to existing graph states as pure clique
//! toggles. This is sound because the entangling evolution is diagonal and
//! the single-qubit correction frame is diagonal too, so both commute with
//! every controlled-Z already applied. [`run_plan`] checks the claim against
//! the statevector whenever it is small enough.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use core::fmt::Write as _;
use core::hash::BuildHasher;

use hashbrown::DefaultHashBuilder;
use hashbrown::HashTable;
use num_traits::Float;

use crate::gates::entangling_unitary;
use crate::{Error, Result, C64};

pub const MAX_VERTICES: usize = 32;
/// Largest graph turned into a statevector.
pub const MAX_STATEVECTOR_QUBITS: usize = 16;
/// Largest graph on which an LC unitary is verified.
pub const MAX_LC_VERIFY_QUBITS: usize = 12;
/// Largest plan cross-checked at the statevector level.
pub const MAX_PLAN_STATEVECTOR_QUBITS: usize = 14;
pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;
/// Tolerance of statevector comparisons up to global phase.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Simple undirected graph on at most 32 labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<u32>,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices {
                n,
                max: MAX_VERTICES,
            });
        }
        Ok(Self { adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(a, b) in edges {
            g.check(a)?;
            g.check(b)?;
            if a == b {
                return Err(Error::GraphMismatch("self-loops are not allowed"));
            }
            g.set_edge(a, b, true);
        }
        Ok(g)
    }

    /// Rows must be symmetric with an empty diagonal.
    pub fn from_rows(rows: Vec<u32>) -> Result<Self> {
        let n = rows.len();
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices {
                n,
                max: MAX_VERTICES,
            });
        }
        for (v, &row) in rows.iter().enumerate() {
            if n < 32 && row >> n != 0 {
                return Err(Error::VertexOutOfRange {
                    vertex: 31 - row.leading_zeros() as usize,
                    n,
                });
            }
            if row >> v & 1 == 1 {
                return Err(Error::GraphMismatch("self-loops are not allowed"));
            }
            for u in bits(row) {
                if rows[u] >> v & 1 == 0 {
                    return Err(Error::GraphMismatch("adjacency is not symmetric"));
                }
            }
        }
        Ok(Self { adj: rows })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn rows(&self) -> &[u32] {
        &self.adj
    }

    pub fn neighbors(&self, v: usize) -> u32 {
        self.adj[v]
    }

    pub fn neighbor_list(&self, v: usize) -> Vec<usize> {
        bits(self.adj[v]).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n() && b < self.n() && self.adj[a] >> b & 1 == 1
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|a| bits(self.adj[a]).filter(move |&b| b > a).map(move |b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Flips edge `{a, b}`: the graph action of one controlled-Z.
    pub fn toggle_edge(&self, a: usize, b: usize) -> Result<Self> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::DuplicateVertex(a));
        }
        let mut g = self.clone();
        g.adj[a] ^= 1 << b;
        g.adj[b] ^= 1 << a;
        Ok(g)
    }

    /// Toggles every edge inside `N(v)`.
    pub fn local_complement(&self, v: usize) -> Result<Self> {
        self.check(v)?;
        let mut g = self.clone();
        lc_rows(&mut g.adj, v);
        Ok(g)
    }

    /// Toggles every pair inside `subset`: the graph action of the m-qubit
    /// entangling gate at the controlled-Z time.
    pub fn toggle_clique(&self, subset: &[usize]) -> Result<Self> {
        let mask = self.subset_mask(subset)?;
        let mut g = self.clone();
        for v in bits(mask) {
            g.adj[v] ^= mask & !(1 << v);
        }
        Ok(g)
    }

    /// One generator `X_v Π_{u∈N(v)} Z_u` per vertex.
    pub fn stabilizers(&self) -> Vec<StabilizerGenerator> {
        (0..self.n())
            .map(|v| StabilizerGenerator {
                vertex: v,
                x_support: 1 << v,
                z_support: self.adj[v],
            })
            .collect()
    }

    /// Graphviz `graph` text.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{}\" {{\n", name.replace('"', "'"));
        for v in 0..self.n() {
            let _ = writeln!(out, "  {v};");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }

    /// One line `v: u w …` per vertex.
    pub fn to_adjacency_list(&self) -> String {
        let mut out = String::new();
        for v in 0..self.n() {
            let _ = write!(out, "{v}:");
            for u in bits(self.adj[v]) {
                let _ = write!(out, " {u}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Self::to_adjacency_list`] output. Blank lines and `#`
    /// comments are skipped; rows must be listed for vertices `0..n` in order.
    pub fn from_adjacency_list(text: &str) -> Result<Self> {
        let mut rows: Vec<u32> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason| Error::GraphParse { line: i + 1, reason };
            let (head, tail) = line.split_once(':').ok_or(parse_err("expected `v: neighbors`"))?;
            let v: usize = head.trim().parse().map_err(|_| parse_err("bad vertex index"))?;
            if v != rows.len() {
                return Err(parse_err("vertices must be listed in order from 0"));
            }
            if v >= MAX_VERTICES {
                return Err(parse_err("more than 32 vertices"));
            }
            let mut row = 0u32;
            for tok in tail.split_whitespace() {
                let u: usize = tok.parse().map_err(|_| parse_err("bad neighbor index"))?;
                if u >= MAX_VERTICES {
                    return Err(parse_err("neighbor index out of range"));
                }
                row |= 1 << u;
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n() });
        }
        Ok(())
    }

    fn subset_mask(&self, subset: &[usize]) -> Result<u32> {
        let mut mask = 0u32;
        for &v in subset {
            self.check(v)?;
            if mask >> v & 1 == 1 {
                return Err(Error::DuplicateVertex(v));
            }
            mask |= 1 << v;
        }
        if subset.len() < 2 {
            return Err(Error::SubsetTooSmall(subset.len()));
        }
        Ok(mask)
    }

    fn set_edge(&mut self, a: usize, b: usize, on: bool) {
        if on {
            self.adj[a] |= 1 << b;
            self.adj[b] |= 1 << a;
        } else {
            self.adj[a] &= !(1 << b);
            self.adj[b] &= !(1 << a);
        }
    }
}

fn lc_rows(adj: &mut [u32], v: usize) {
    let nv = adj[v];
    for u in bits(nv) {
        adj[u] ^= nv & !(1 << u);
    }
}

/// Indices of the set bits of `mask`, ascending.
fn bits(mut mask: u32) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

/// `X` on `x_support`, `Z` on `z_support`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilizerGenerator {
    pub vertex: usize,
    pub x_support: u32,
    pub z_support: u32,
}

/// Named graph families.
pub mod families {
    use super::*;

    pub fn path(n: usize) -> Result<Graph> {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Graph> {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        Graph::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for a in 0..n {
            for b in a + 1..n {
                g.set_edge(a, b, true);
            }
        }
        Ok(g)
    }

    /// Star with hub `center`.
    pub fn star_at(n: usize, center: usize) -> Result<Graph> {
        let edges: Vec<_> = (0..n).filter(|&v| v != center).map(|v| (center, v)).collect();
        let g = Graph::from_edges(n, &edges)?;
        g.check(center)?;
        Ok(g)
    }

    pub fn star(n: usize) -> Result<Graph> {
        star_at(n, 0)
    }

    /// Row-major `w × h` square lattice.
    pub fn grid(w: usize, h: usize) -> Result<Graph> {
        grid3d(w, h, 1)
    }

    /// `x × y × z` cubic lattice, index `i + x(j + y k)`.
    pub fn grid3d(x: usize, y: usize, z: usize) -> Result<Graph> {
        let n = x * y * z;
        let idx = |i, j, k| i + x * (j + y * k);
        let mut edges = Vec::new();
        for k in 0..z {
            for j in 0..y {
                for i in 0..x {
                    if i + 1 < x {
                        edges.push((idx(i, j, k), idx(i + 1, j, k)));
                    }
                    if j + 1 < y {
                        edges.push((idx(i, j, k), idx(i, j + 1, k)));
                    }
                    if k + 1 < z {
                        edges.push((idx(i, j, k), idx(i, j, k + 1)));
                    }
                }
            }
        }
        Graph::from_edges(n, &edges)
    }

    /// Seven vertices: `a₂–a₁–a₃`, `b₂–b₁–b₃`, `a₁–v–b₁` with `v = 0`,
    /// `a = 1, 2, 3`, `b = 4, 5, 6`.
    pub fn h_shape() -> Graph {
        Graph::from_edges(7, &[(1, 2), (1, 3), (0, 1), (0, 4), (4, 5), (4, 6)])
            .expect("fixed edges")
    }

    /// The four-vertex "box", a 4-cycle.
    pub fn box4() -> Graph {
        cycle(4).expect("fixed size")
    }
}

fn check_statevector(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::TooManyQubits { n, max });
    }
    Ok(())
}

fn qubit_bit(n: usize, v: usize) -> usize {
    1 << (n - 1 - v)
}

/// Graph vertex set `mask` as a statevector index mask.
fn index_mask(n: usize, mask: u32) -> usize {
    bits(mask).map(|v| qubit_bit(n, v)).fold(0, |a, b| a | b)
}

/// `Π_{(a,b)∈E} CZ_ab |+⟩^⊗n`.
pub fn graph_state_vector(g: &Graph) -> Result<Vec<C64>> {
    let n = g.n();
    check_statevector(n, MAX_STATEVECTOR_QUBITS)?;
    let amp = Float::powi(2.0, -(n as i32)).sqrt();
    let edges: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .map(|(a, b)| (qubit_bit(n, a), qubit_bit(n, b)))
        .collect();
    Ok((0..1usize << n)
        .map(|x| {
            let parity = edges.iter().filter(|(a, b)| x & a != 0 && x & b != 0).count();
            C64::new(if parity % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect())
}

/// `⟨ψ|S_v|ψ⟩` for every generator of `g`.
pub fn stabilizer_expectations(psi: &[C64], g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    check_statevector(n, MAX_STATEVECTOR_QUBITS)?;
    if psi.len() != 1 << n {
        return Err(Error::ShapeMismatch {
            left: 1 << n,
            right: psi.len(),
        });
    }
    Ok(g.stabilizers()
        .iter()
        .map(|s| {
            let flip = index_mask(n, s.x_support);
            let z = index_mask(n, s.z_support);
            psi.iter()
                .enumerate()
                .map(|(x, a)| {
                    let sign = if (x & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    (psi[x ^ flip].conj() * a).re * sign
                })
                .sum()
        })
        .collect())
}

/// Single-qubit unitaries used by the LC rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalGate {
    /// `e^{-iπ/4 X}`, a square root of `-iX`.
    SqrtMinusIX,
    /// `e^{iπ/4 Z}`, a square root of `iZ` up to phase.
    SqrtIZ,
}

impl LocalGate {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let mi = C64::new(0.0, -FRAC_1_SQRT_2);
        match self {
            LocalGate::SqrtMinusIX => [[r, mi], [mi, r]],
            LocalGate::SqrtIZ => [
                [C64::from_polar(1.0, FRAC_PI_4), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::from_polar(1.0, -FRAC_PI_4)],
            ],
        }
    }
}

/// Applies `m` to qubit `v` of an `n`-qubit statevector in place.
pub fn apply_single_qubit(psi: &mut [C64], n: usize, v: usize, m: [[C64; 2]; 2]) {
    let bit = qubit_bit(n, v);
    for x in 0..psi.len() {
        if x & bit == 0 {
            let (a, b) = (psi[x], psi[x | bit]);
            psi[x] = m[0][0] * a + m[0][1] * b;
            psi[x | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Local operations mapping `|G⟩` to `|τ_v(G)⟩` up to global phase:
/// `e^{-iπ/4 X_v}` and `e^{iπ/4 Z_u}` for every `u ∈ N(v)`.
pub fn lc_implementing_unitary(g: &Graph, v: usize) -> Result<Vec<(usize, LocalGate)>> {
    g.check(v)?;
    let mut ops = vec![(v, LocalGate::SqrtMinusIX)];
    ops.extend(g.neighbor_list(v).into_iter().map(|u| (u, LocalGate::SqrtIZ)));
    Ok(ops)
}

pub fn apply_local_ops(psi: &mut [C64], n: usize, ops: &[(usize, LocalGate)]) {
    for &(q, gate) in ops {
        apply_single_qubit(psi, n, q, gate.matrix());
    }
}

/// [`lc_implementing_unitary`], checked on the statevector.
pub fn verified_lc_unitary(g: &Graph, v: usize) -> Result<Vec<(usize, LocalGate)>> {
    check_statevector(g.n(), MAX_LC_VERIFY_QUBITS)?;
    let ops = lc_implementing_unitary(g, v)?;
    let mut psi = graph_state_vector(g)?;
    apply_local_ops(&mut psi, g.n(), &ops);
    let target = graph_state_vector(&g.local_complement(v)?)?;
    if !equal_up_to_phase(&psi, &target, STATE_TOLERANCE) {
        return Err(Error::LcVerification { vertex: v });
    }
    Ok(ops)
}

/// `max_i |a_i - e^{iθ} b_i| ≤ tol` for the best `θ`, taken from the
/// largest entry of `b`.
pub fn equal_up_to_phase(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some((k, _)) = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
    else {
        return true;
    };
    if b[k].norm() == 0.0 {
        return a.iter().all(|x| x.norm() <= tol);
    }
    let ratio = a[k] / b[k];
    if ratio.norm() == 0.0 {
        return false;
    }
    let phase = ratio / ratio.norm();
    a.iter().zip(b).all(|(x, y)| (x - phase * y).norm() <= tol)
}

/// Vertices at which to complement, in order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LcWitness {
    pub vertices: Vec<usize>,
}

impl LcWitness {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn replay(&self, g: &Graph) -> Result<Graph> {
        self.vertices
            .iter()
            .try_fold(g.clone(), |g, &v| g.local_complement(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LcOutcome {
    Equivalent(LcWitness),
    /// The whole orbit was explored without meeting the target.
    NotInOrbit,
    /// Stopped after visiting `orbit_cap` graphs.
    CapReached,
}

impl LcOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            LcOutcome::Equivalent(_) => "equivalent",
            LcOutcome::NotInOrbit => "not-in-orbit",
            LcOutcome::CapReached => "cap-reached",
        }
    }

    pub fn witness(&self) -> Option<&LcWitness> {
        match self {
            LcOutcome::Equivalent(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcSearch {
    pub outcome: LcOutcome,
    /// Distinct graphs visited, the source included.
    pub explored: usize,
}

/// Breadth-first search over local complementations from `source`, trying
/// vertices in ascending order, so the witness is the lexicographically
/// first among the shortest.
pub fn lc_equivalent(source: &Graph, target: &Graph, orbit_cap: usize) -> Result<LcSearch> {
    let n = source.n();
    if target.n() != n {
        return Err(Error::GraphMismatch("graphs have different vertex counts"));
    }
    if source == target {
        return Ok(LcSearch {
            outcome: LcOutcome::Equivalent(LcWitness::default()),
            explored: 1,
        });
    }
    if orbit_cap <= 1 {
        return Ok(LcSearch {
            outcome: LcOutcome::CapReached,
            explored: 1,
        });
    }

    let hasher = DefaultHashBuilder::default();
    let hash = |rows: &[u32]| hasher.hash_one(rows);
    // Flat arena of visited graphs; `parent[i]` is (index, vertex) of the
    // complementation that first reached graph `i`.
    let mut arena: Vec<u32> = source.adj.clone();
    let mut parent: Vec<(u32, u8)> = vec![(u32::MAX, 0)];
    let mut table: HashTable<u32> = HashTable::new();
    table.insert_unique(hash(&source.adj), 0, |&i| hash(row_slice(&arena, n, i)));

    let mut scratch = vec![0u32; n];
    let mut head = 0usize;
    while head < parent.len() {
        for v in 0..n {
            let current = row_slice(&arena, n, head as u32);
            if current[v].count_ones() < 2 {
                continue;
            }
            scratch.copy_from_slice(current);
            lc_rows(&mut scratch, v);
            let h = hash(&scratch);
            if table
                .find(h, |&i| row_slice(&arena, n, i) == scratch.as_slice())
                .is_some()
            {
                continue;
            }
            let idx = parent.len() as u32;
            arena.extend_from_slice(&scratch);
            parent.push((head as u32, v as u8));
            table.insert_unique(h, idx, |&i| hash(row_slice(&arena, n, i)));
            if scratch == target.adj {
                return Ok(LcSearch {
                    outcome: LcOutcome::Equivalent(trace_witness(&parent, idx)),
                    explored: parent.len(),
                });
            }
            if parent.len() >= orbit_cap {
                return Ok(LcSearch {
                    outcome: LcOutcome::CapReached,
                    explored: parent.len(),
                });
            }
        }
        head += 1;
    }
    Ok(LcSearch {
        outcome: LcOutcome::NotInOrbit,
        explored: parent.len(),
    })
}

fn row_slice(arena: &[u32], n: usize, i: u32) -> &[u32] {
    let start = i as usize * n;
    &arena[start..start + n]
}

fn trace_witness(parent: &[(u32, u8)], mut idx: u32) -> LcWitness {
    let mut vertices = Vec::new();
    while parent[idx as usize].0 != u32::MAX {
        let (p, v) = parent[idx as usize];
        vertices.push(v as usize);
        idx = p;
    }
    vertices.reverse();
    LcWitness { vertices }
}

/// Size of the labeled LC orbit of `g`, or `None` past `cap`.
pub fn lc_orbit_size(g: &Graph, cap: usize) -> Option<usize> {
    let n = g.n();
    let mut seen: hashbrown::HashSet<Vec<u32>> = hashbrown::HashSet::new();
    let mut queue = vec![g.adj.clone()];
    seen.insert(g.adj.clone());
    let mut head = 0;
    while head < queue.len() {
        for v in 0..n {
            let mut next = queue[head].clone();
            lc_rows(&mut next, v);
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push(next);
            }
        }
        head += 1;
    }
    Some(seen.len())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanStep {
    /// m-qubit entangling gate at the controlled-Z time on these vertices.
    Entangle(Vec<usize>),
    Cz(usize, usize),
    LocalComplement(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionPlan {
    pub name: String,
    pub n_qubits: usize,
    pub steps: Vec<PlanStep>,
    pub target: Graph,
    pub description: String,
    /// The topology is inferred from a caption rather than given exactly.
    pub reconstructed: bool,
}

impl FusionPlan {
    pub fn validate(&self) -> Result<()> {
        if self.target.n() != self.n_qubits {
            return Err(Error::GraphMismatch("target size differs from n_qubits"));
        }
        let g = Graph::empty(self.n_qubits)?;
        for step in &self.steps {
            apply_step(&g, step)?;
        }
        Ok(())
    }

    /// Replays the steps on the empty graph.
    pub fn final_graph(&self) -> Result<Graph> {
        self.steps
            .iter()
            .try_fold(Graph::empty(self.n_qubits)?, |g, s| apply_step(&g, s))
    }
}

pub fn apply_step(g: &Graph, step: &PlanStep) -> Result<Graph> {
    match step {
        PlanStep::Entangle(subset) => g.toggle_clique(subset),
        PlanStep::Cz(a, b) => g.toggle_edge(*a, *b),
        PlanStep::LocalComplement(v) => g.local_complement(*v),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRun {
    pub final_graph: Graph,
    pub search: LcSearch,
    /// `None` when the plan is too large for the statevector check.
    pub statevector_verified: Option<bool>,
}

impl PlanRun {
    pub fn witness(&self) -> Option<&LcWitness> {
        self.search.outcome.witness()
    }
}

/// Applies the plan, searches for an LC witness to the target and, for at
/// most 14 qubits, checks every step and the witness on the statevector.
pub fn run_plan(plan: &FusionPlan, orbit_cap: usize) -> Result<PlanRun> {
    plan.validate()?;
    let final_graph = plan.final_graph()?;
    let search = lc_equivalent(&final_graph, &plan.target, orbit_cap)?;
    let statevector_verified = if plan.n_qubits <= MAX_PLAN_STATEVECTOR_QUBITS {
        Some(statevector_replay(plan, search.outcome.witness())?)
    } else {
        None
    };
    Ok(PlanRun {
        final_graph,
        search,
        statevector_verified,
    })
}

/// Evolves `|+⟩^⊗n` through the plan with the entangling unitary, the CZ
/// matrix and the LC local operations, comparing against the graph state
/// after every step and after the witness.
fn statevector_replay(plan: &FusionPlan, witness: Option<&LcWitness>) -> Result<bool> {
    let n = plan.n_qubits;
    let mut g = Graph::empty(n)?;
    let mut psi = graph_state_vector(&g)?;
    for step in &plan.steps {
        match step {
            PlanStep::Entangle(subset) => apply_entangling(&mut psi, n, subset)?,
            PlanStep::Cz(a, b) => apply_entangling(&mut psi, n, &[*a, *b])?,
            PlanStep::LocalComplement(v) => {
                apply_local_ops(&mut psi, n, &lc_implementing_unitary(&g, *v)?)
            }
        }
        g = apply_step(&g, step)?;
        if !equal_up_to_phase(&psi, &graph_state_vector(&g)?, STATE_TOLERANCE) {
            return Ok(false);
        }
    }
    if let Some(w) = witness {
        for &v in &w.vertices {
            apply_local_ops(&mut psi, n, &lc_implementing_unitary(&g, v)?);
            g = g.local_complement(v)?;
        }
        if g != plan.target
            || !equal_up_to_phase(&psi, &graph_state_vector(&plan.target)?, STATE_TOLERANCE)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Applies `entangling_unitary(|S|, π/λ', λ')` embedded on the qubits `S`.
pub fn apply_entangling(psi: &mut [C64], n: usize, subset: &[usize]) -> Result<()> {
    let lambda_prime = 1.0;
    let u = entangling_unitary(subset.len(), PI / lambda_prime, lambda_prime)?;
    let m = subset.len();
    for (x, a) in psi.iter_mut().enumerate() {
        let local = subset
            .iter()
            .enumerate()
            .filter(|(_, &v)| x & qubit_bit(n, v) != 0)
            .fold(0usize, |acc, (j, _)| acc | 1 << (m - 1 - j));
        *a *= u[(local, local)];
    }
    Ok(())
}

/// Named fusion plans: `fig2a`, `fig2b`, `fig3a`, `fig3b`, `fig3c`,
/// `fig4a`, `fig4b`, `fig4c`, `fig5`, `box4`, `grid2x2`, `linearN` (odd
/// `N ≥ 3`) and `starN` (`N ≥ 2`).
pub fn recipe(name: &str) -> Option<FusionPlan> {
    use families::*;
    use PlanStep::*;
    let plan = |n: usize, steps: Vec<PlanStep>, target: Graph, description: &str, reconstructed| {
        Some(FusionPlan {
            name: String::from(name),
            n_qubits: n,
            steps,
            target,
            description: String::from(description),
            reconstructed,
        })
    };
    if let Some(k) = name.strip_prefix("linear").and_then(|k| k.parse::<usize>().ok()) {
        return linear_cluster_plan(k).map(|mut p| {
            p.name = String::from(name);
            p
        });
    }
    if let Some(k) = name.strip_prefix("star").and_then(|k| k.parse::<usize>().ok()) {
        if !(2..=MAX_VERTICES).contains(&k) {
            return None;
        }
        return plan(
            k,
            vec![Entangle((0..k).collect()), LocalComplement(0)],
            star(k).ok()?,
            "entangle all qubits at once, then complement at the hub",
            false,
        );
    }
    match name {
        "fig2a" => linear_cluster_plan(3).map(|mut p| {
            p.name = String::from(name);
            p
        }),
        "fig2b" => plan(
            7,
            vec![
                Entangle(vec![0, 1, 2]),
                LocalComplement(1),
                Entangle(vec![4, 5, 6]),
                LocalComplement(5),
                Entangle(vec![2, 3, 4]),
            ],
            path(7).ok()?,
            "two three-qubit linear clusters a1a2a3 (0,1,2) and b1b2b3 (4,5,6) fused \
             through a fresh qubit c (3) by one three-qubit gate on {a3, c, b1}",
            false,
        ),
        "fig3a" => plan(
            4,
            vec![Entangle(vec![0, 1, 2, 3])],
            star(4).ok()?,
            "four-qubit gate on |+>^4 gives K4, equivalent to the four-qubit star (GHZ)",
            false,
        ),
        "fig3b" => plan(
            7,
            vec![Entangle(vec![0, 1, 2, 3]), Entangle(vec![0, 4, 5, 6])],
            h_shape(),
            "two four-qubit gates sharing v (0) with a = 1,2,3 and b = 4,5,6 give \
             the H-shaped double star",
            false,
        ),
        "fig3c" | "box4" => plan(
            4,
            vec![Entangle(vec![0, 1, 2, 3]), Cz(0, 2)],
            box4(),
            "four-qubit gate plus one controlled-Z on a diagonal gives the box graph",
            false,
        ),
        "grid2x2" => plan(
            4,
            vec![Entangle(vec![0, 1, 2, 3]), Cz(0, 3)],
            grid(2, 2).ok()?,
            "the box recipe on row-major 2x2 lattice labels",
            false,
        ),
        "fig4a" => recipe("star5").map(|mut p| {
            p.name = String::from(name);
            p
        }),
        "fig4b" => plan(
            8,
            vec![Entangle(vec![0, 1, 2, 3, 4]), Entangle(vec![7, 5, 6, 3, 4])],
            Graph::from_edges(
                8,
                &[(0, 1), (0, 2), (0, 3), (0, 4), (7, 5), (7, 6), (7, 3), (7, 4)],
            )
            .ok()?,
            "eight-qubit 2D state from two five-qubit gates with hubs 0 and 7 \
             sharing qubits 3 and 4",
            true,
        ),
        "fig4c" => checkerboard_plan(name, 3, 3, 1, false),
        "fig5" => checkerboard_plan(name, 3, 3, 3, true),
        _ => None,
    }
}

pub fn recipe_names() -> Vec<&'static str> {
    vec![
        "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c", "fig5", "box4",
        "grid2x2", "linear5", "linear7", "star4", "star5",
    ]
}

/// `n` odd: three-qubit gates on `{2k, 2k+1, 2k+2}`, no complementation.
pub fn linear_cluster_plan(n: usize) -> Option<FusionPlan> {
    if n < 3 || n % 2 == 0 || n > MAX_VERTICES {
        return None;
    }
    Some(FusionPlan {
        name: format!("linear{n}"),
        n_qubits: n,
        steps: (0..(n - 1) / 2)
            .map(|k| PlanStep::Entangle(vec![2 * k, 2 * k + 1, 2 * k + 2]))
            .collect(),
        target: families::path(n).ok()?,
        description: format!(
            "{n}-qubit linear cluster from {} three-qubit gates",
            (n - 1) / 2
        ),
        reconstructed: false,
    })
}

/// Lattice with every even-parity site entangled with its lattice
/// neighbours; with `complement` the plan also complements at each of them.
fn checkerboard_plan(name: &str, x: usize, y: usize, z: usize, complement: bool) -> Option<FusionPlan> {
    let target = families::grid3d(x, y, z).ok()?;
    let idx = |i, j, k| i + x * (j + y * k);
    let mut centers = Vec::new();
    for k in 0..z {
        for j in 0..y {
            for i in 0..x {
                if (i + j + k) % 2 == 0 {
                    centers.push(idx(i, j, k));
                }
            }
        }
    }
    let mut steps: Vec<PlanStep> = centers
        .iter()
        .map(|&c| {
            let mut s = vec![c];
            s.extend(target.neighbor_list(c));
            PlanStep::Entangle(s)
        })
        .collect();
    if complement {
        steps.extend(centers.iter().map(|&c| PlanStep::LocalComplement(c)));
    }
    let dims = if z == 1 {
        format!("{x}x{y}")
    } else {
        format!("{x}x{y}x{z}")
    };
    Some(FusionPlan {
        name: String::from(name),
        n_qubits: target.n(),
        steps,
        target,
        description: format!(
            "{dims} cluster: each even-parity site entangled with its lattice neighbours{}",
            if complement {
                ", then complemented at every such site"
            } else {
                ""
            }
        ),
        reconstructed: true,
    })
}

/// Target graphs of the catalog by name.
pub fn catalog_graphs() -> Vec<(String, Graph)> {
    use families::*;
    let mut out: Vec<(String, Graph)> = Vec::new();
    for n in [3, 5, 7, 9, 11] {
        out.push((format!("linear_cluster({n})"), path(n).expect("small")));
    }
    for n in [2, 3, 4, 5, 8] {
        out.push((format!("star({n})"), star(n).expect("small")));
    }
    out.push(("box(4)".into(), box4()));
    out.push(("h_shape(7)".into(), h_shape()));
    for (w, h) in [(2, 2), (3, 2), (4, 2), (3, 3), (4, 3)] {
        out.push((format!("grid({w},{h})"), grid(w, h).expect("small")));
    }
    for (a, b, c) in [(2, 2, 2), (3, 2, 2), (3, 3, 3)] {
        out.push((format!("grid3d({a},{b},{c})"), grid3d(a, b, c).expect("small")));
    }
    for name in recipe_names() {
        if let Some(p) = recipe(name) {
            out.push((format!("{name}.target"), p.target));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;

    #[test]
    fn small_graph_states() {
        let s = graph_state_vector(&Graph::empty(1).unwrap()).unwrap();
        assert!((s[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (s[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let e = graph_state_vector(&path(2).unwrap()).unwrap();
        let re: Vec<f64> = e.iter().map(|a| a.re).collect();
        assert_eq!(re, vec![0.5, 0.5, 0.5, -0.5]);
        let k3 = graph_state_vector(&complete(3).unwrap()).unwrap();
        assert!((k3[7].re + Float::powf(2.0, -1.5)).abs() < 1e-15);
    }

    #[test]
    fn stabilizer_examples() {
        let g = path(3).unwrap();
        let psi = graph_state_vector(&g).unwrap();
        for e in stabilizer_expectations(&psi, &g).unwrap() {
            assert!((e - 1.0).abs() < 1e-12);
        }
        let wrong = graph_state_vector(&g.toggle_edge(0, 2).unwrap()).unwrap();
        assert!(stabilizer_expectations(&wrong, &g)
            .unwrap()
            .iter()
            .any(|e| (e - 1.0).abs() > 1e-6));
        let mut zero = vec![C64::new(0.0, 0.0); 16];
        zero[0] = C64::new(1.0, 0.0);
        let ex = stabilizer_expectations(&zero, &star(4).unwrap()).unwrap();
        assert_eq!(ex[0], 0.0);
        assert!(stabilizer_expectations(&zero, &star(3).unwrap()).is_err());
    }

    #[test]
    fn local_complement_examples() {
        for v in 0..4 {
            assert_eq!(
                complete(4).unwrap().local_complement(v).unwrap(),
                star_at(4, v).unwrap()
            );
        }
        assert_eq!(path(3).unwrap().local_complement(1).unwrap(), complete(3).unwrap());
        let g = grid(3, 2).unwrap();
        assert_eq!(g.local_complement(1).unwrap().local_complement(1).unwrap(), g);
        assert!(g.local_complement(6).is_err());
    }

    #[test]
    fn toggle_clique_examples() {
        let e = Graph::empty(4).unwrap();
        let k3 = e.toggle_clique(&[1, 2, 3]).unwrap();
        assert_eq!(k3.edges(), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(e.toggle_clique(&[0, 1, 2, 3]).unwrap(), complete(4).unwrap());
        assert_eq!(k3.toggle_clique(&[1, 2, 3]).unwrap(), e);
        assert!(matches!(e.toggle_clique(&[1, 1]), Err(Error::DuplicateVertex(1))));
        assert!(matches!(e.toggle_clique(&[1]), Err(Error::SubsetTooSmall(1))));
    }

    #[test]
    fn lc_unitary_examples() {
        verified_lc_unitary(&complete(4).unwrap(), 0).unwrap();
        verified_lc_unitary(&path(3).unwrap(), 1).unwrap();
        let lonely = Graph::from_edges(3, &[(1, 2)]).unwrap();
        let ops = verified_lc_unitary(&lonely, 0).unwrap();
        assert_eq!(ops, vec![(0, LocalGate::SqrtMinusIX)]);
    }

    #[test]
    fn search_examples() {
        let k4 = complete(4).unwrap();
        let same = lc_equivalent(&k4, &k4, 10).unwrap();
        assert_eq!(same.outcome, LcOutcome::Equivalent(LcWitness::default()));
        let s = lc_equivalent(&k4, &star(4).unwrap(), DEFAULT_ORBIT_CAP).unwrap();
        assert_eq!(s.outcome.witness().unwrap().vertices, vec![0]);
        let k4_minus = k4.toggle_edge(0, 2).unwrap();
        let s = lc_equivalent(&k4_minus, &cycle(4).unwrap(), DEFAULT_ORBIT_CAP).unwrap();
        assert_eq!(s.outcome.witness().unwrap().vertices, vec![0]);
    }

    #[test]
    fn search_distinguishes_cap_from_exhaustion() {
        let empty = Graph::empty(4).unwrap();
        let s = lc_equivalent(&path(4).unwrap(), &empty, DEFAULT_ORBIT_CAP).unwrap();
        assert_eq!(s.outcome, LcOutcome::NotInOrbit);
        let big = grid(4, 3).unwrap();
        let s = lc_equivalent(&big, &Graph::empty(12).unwrap(), 50).unwrap();
        assert_eq!(s.outcome, LcOutcome::CapReached);
        assert_eq!(s.explored, 50);
    }

    #[test]
    fn adjacency_and_dot_round_trip() {
        let g = h_shape();
        let text = g.to_adjacency_list();
        assert_eq!(Graph::from_adjacency_list(&text).unwrap(), g);
        assert!(Graph::from_adjacency_list("0: 1\n1:\n").is_err());
        assert!(Graph::from_adjacency_list("0: 0\n").is_err());
        let dot = path(3).unwrap().to_dot("p3");
        assert!(dot.contains("0 -- 1;") && dot.contains("1 -- 2;"));
    }

    #[test]
    fn fusion_examples() {
        for (name, witness) in [
            ("fig2a", vec![1]),
            ("fig2b", vec![3]),
            ("fig3a", vec![0]),
            ("fig3b", vec![1, 4]),
            ("fig3c", vec![0]),
            ("grid2x2", vec![0]),
            ("fig4a", vec![]),
            ("linear7", vec![1, 3, 5]),
        ] {
            let plan = recipe(name).unwrap();
            let run = run_plan(&plan, DEFAULT_ORBIT_CAP).unwrap();
            assert_eq!(run.witness().map(|w| w.vertices.clone()), Some(witness), "{name}");
            assert_eq!(run.statevector_verified, Some(true), "{name}");
        }
    }

    #[test]
    fn fig2b_bridges_with_a_triangle() {
        let g = recipe("fig2b").unwrap().final_graph().unwrap();
        assert!(g.has_edge(2, 3) && g.has_edge(3, 4) && g.has_edge(2, 4));
    }

    #[test]
    fn catalog_names_resolve() {
        for name in recipe_names() {
            recipe(name).unwrap().validate().unwrap();
        }
        assert!(recipe("linear4").is_none());
        assert!(recipe("nothing").is_none());
    }
}
