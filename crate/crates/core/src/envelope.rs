//! The combined graph of `L_{ξ,1}` and `L_{ξ,2}` and the decoding of `‖ξ‖`'s
//! continued fraction from its local maxima.
//!
//! `L_{ξ,1}` follows the trajectory of `x_{n−1}` on `[q_{n−1}, q_n]`, where `q_n` is the
//! meeting point of the rising branch of `x_{n−1}` with the falling branch of `x_n`. On
//! the same interval `L_{ξ,2}` is the lower envelope of the trajectories of
//! `x_{n,0}, …, x_{n,a_n}`. For rational `ξ`, past `q_{s−1}` the first minimum falls along
//! `x_{s−1}` and the second rises along `x_{s−2}` forever.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{format_rational, LatticePoint, LogCoord, Rational};
use crate::cf::{normalize, CfExpansion, ConvergentTable};
use crate::error::{Error, Result};
use crate::trajectory::{crossing, crossing_unchecked, Trajectory};

/// Number of complete intervals built when no depth is given.
pub const DEFAULT_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slope {
    Down,
    Up,
}

impl Slope {
    pub fn as_i8(self) -> i8 {
        match self {
            Slope::Down => -1,
            Slope::Up => 1,
        }
    }
}

/// A vertex `(q, v)`; `owner` is the lattice point whose trajectory carries the segment
/// that starts here.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub q: LogCoord,
    pub v: LogCoord,
    pub owner: LatticePoint,
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Vertex", 3)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("v", &self.v)?;
        st.serialize_field("owner", &self.owner)?;
        st.end()
    }
}

/// What follows the last vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// An infinite ray of the given slope, owned by the last vertex's owner.
    Ray(Slope),
    /// The function is only known up to the last vertex.
    Truncated,
}

/// A continuous function on `[q_0, …)` made of segments of slope exactly ±1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear {
    vertices: Vec<Vertex>,
    slopes: Vec<Slope>,
    tail: Tail,
}

fn segment_slope(a: &Vertex, b: &Vertex) -> Option<Slope> {
    let (qa, qb) = (a.q.ratio(), b.q.ratio());
    let (va, vb) = (a.v.ratio(), b.v.ratio());
    if vb * qa == va * qb {
        Some(Slope::Up)
    } else if vb * qb == va * qa {
        Some(Slope::Down)
    } else {
        None
    }
}

impl PiecewiseLinear {
    /// Validates strictly increasing abscissae and ±1 slopes between consecutive vertices.
    pub fn new(vertices: Vec<Vertex>, tail: Tail) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Precondition(
                "piecewise-linear function without vertices".into(),
            ));
        }
        let mut slopes = Vec::with_capacity(vertices.len() - 1);
        for (i, w) in vertices.windows(2).enumerate() {
            if w[0].q >= w[1].q {
                return Err(Error::Precondition(format!(
                    "abscissae not increasing at vertex {}: {} then {}",
                    i, w[0].q, w[1].q
                )));
            }
            let slope = segment_slope(&w[0], &w[1]).ok_or_else(|| {
                Error::Precondition(format!(
                    "segment {i} from ({}, {}) to ({}, {}) does not have slope ±1",
                    w[0].q, w[0].v, w[1].q, w[1].v
                ))
            })?;
            slopes.push(slope);
        }
        Ok(Self {
            vertices,
            slopes,
            tail,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Slope of the segment that starts at vertex `i` (the tail for the last vertex).
    pub fn slope_from(&self, i: usize) -> Option<Slope> {
        match self.slopes.get(i) {
            Some(s) => Some(*s),
            None if i + 1 == self.vertices.len() => match self.tail {
                Tail::Ray(s) => Some(s),
                Tail::Truncated => None,
            },
            None => None,
        }
    }

    /// Slope at `q = q_0` going right.
    pub fn initial_slope(&self) -> Option<Slope> {
        self.slope_from(0)
    }

    /// Right end of the known range for truncated functions.
    pub fn end(&self) -> Option<&LogCoord> {
        match self.tail {
            Tail::Truncated => self.vertices.last().map(|v| &v.q),
            Tail::Ray(_) => None,
        }
    }

    /// Index of the last vertex with abscissa `≤ q`.
    fn index_at_or_before(&self, q: &LogCoord) -> Option<usize> {
        self.vertices.partition_point(|v| v.q <= *q).checked_sub(1)
    }

    fn index_before(&self, q: &LogCoord) -> Option<usize> {
        self.vertices.partition_point(|v| v.q < *q).checked_sub(1)
    }

    /// Exact value at `q` by moving along the ±1 segment from the preceding vertex.
    pub fn evaluate(&self, q: &LogCoord) -> Result<LogCoord> {
        let out_of_range = || Error::OutOfRange { q: q.to_string() };
        let i = self.index_at_or_before(q).ok_or_else(out_of_range)?;
        let vertex = &self.vertices[i];
        if vertex.q == *q {
            return Ok(vertex.v.clone());
        }
        let step = q - &vertex.q;
        match self.slope_from(i).ok_or_else(out_of_range)? {
            Slope::Up => Ok(&vertex.v + &step),
            Slope::Down => Ok(&vertex.v - &step),
        }
    }

    /// Slope just to the right of `q`.
    pub fn slope_after(&self, q: &LogCoord) -> Option<Slope> {
        self.index_at_or_before(q).and_then(|i| self.slope_from(i))
    }

    /// Slope just to the left of `q`.
    pub fn slope_before(&self, q: &LogCoord) -> Option<Slope> {
        self.index_before(q).and_then(|i| self.slope_from(i))
    }

    /// Owner of the segment just to the right of `q`.
    pub fn owner_after(&self, q: &LogCoord) -> Option<&LatticePoint> {
        self.index_at_or_before(q).map(|i| &self.vertices[i].owner)
    }

    /// Local maxima of the restriction to the closed interval `[a, b]`: interior vertices
    /// where the slope turns from +1 to −1, `a` when the function leaves it downwards and
    /// `b` when the function reaches it upwards.
    pub fn local_maxima_on(&self, a: &LogCoord, b: &LogCoord) -> Result<Vec<(LogCoord, LogCoord)>> {
        let mut out = Vec::new();
        if self.slope_after(a) == Some(Slope::Down) {
            out.push((a.clone(), self.evaluate(a)?));
        }
        let lo = self.vertices.partition_point(|v| v.q <= *a);
        let hi = self.vertices.partition_point(|v| v.q < *b);
        for i in lo..hi {
            if i > 0 && self.slopes[i - 1] == Slope::Up && self.slope_from(i) == Some(Slope::Down) {
                let v = &self.vertices[i];
                out.push((v.q.clone(), v.v.clone()));
            }
        }
        if self.slope_before(b) == Some(Slope::Up) {
            out.push((b.clone(), self.evaluate(b)?));
        }
        Ok(out)
    }

    /// All local maxima on the known range: `q_0` if the function starts downwards, each
    /// +1 → −1 turn, and the right end of a truncated function reached upwards.
    pub fn local_maxima(&self) -> Vec<(LogCoord, LogCoord)> {
        let mut out = Vec::new();
        if self.initial_slope() == Some(Slope::Down) {
            let v = &self.vertices[0];
            out.push((v.q.clone(), v.v.clone()));
        }
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            let turns = self.slopes[i - 1] == Slope::Up
                && match self.slope_from(i) {
                    Some(s) => s == Slope::Down,
                    None => true,
                };
            if turns {
                out.push((v.q.clone(), v.v.clone()));
            }
        }
        out
    }
}

/// Appends `vertex`, merging it into the previous one when the abscissae coincide.
fn push_vertex(out: &mut Vec<Vertex>, vertex: Vertex) {
    if let Some(last) = out.last_mut() {
        if last.q == vertex.q {
            debug_assert_eq!(last.v, vertex.v, "discontinuity at {}", vertex.q);
            last.owner = vertex.owner;
            return;
        }
    }
    out.push(vertex);
}

/// Drops interior vertices where neither the slope nor the owner changes.
fn drop_redundant(vertices: Vec<Vertex>) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if out.len() >= 2 {
            let n = out.len();
            let (a, b) = (&out[n - 2], &out[n - 1]);
            if a.owner == b.owner && segment_slope(a, b) == segment_slope(b, &v) {
                out.pop();
            }
        }
        out.push(v);
    }
    out
}

fn owner_level_cmp(a: Option<&LogCoord>, b: Option<&LogCoord>) -> Ordering {
    // An absent branch is −∞.
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// Lower envelope on `[from, to]` of trajectories whose falling levels strictly increase
/// and whose rising levels strictly decrease along the slice.
///
/// With that ordering a later trajectory beats an earlier one exactly from the meeting of
/// the earlier rising branch with the later falling branch onwards, so a stack sweep in
/// slice order yields the envelope.
pub fn lower_envelope(
    trajectories: &[Trajectory],
    from: &LogCoord,
    to: &LogCoord,
) -> Result<Vec<Vertex>> {
    if trajectories.is_empty() || from >= to {
        return Err(Error::Precondition("empty envelope input".into()));
    }
    for w in trajectories.windows(2) {
        let falling_up =
            owner_level_cmp(w[0].falling_level(), w[1].falling_level()) == Ordering::Less;
        let rising_down =
            owner_level_cmp(w[0].rising_level(), w[1].rising_level()) == Ordering::Greater;
        if !falling_up || !rising_down {
            return Err(Error::Precondition(format!(
                "trajectories of {} and {} are not ordered for the envelope sweep",
                w[0].point(),
                w[1].point()
            )));
        }
    }

    let mut stack: Vec<(usize, Option<LogCoord>)> = Vec::new();
    for u in 0..trajectories.len() {
        loop {
            let Some((t, start)) = stack.last() else {
                stack.push((u, None));
                break;
            };
            let (threshold, _) = crossing_unchecked(&trajectories[*t], &trajectories[u])?;
            if start.as_ref().is_some_and(|s| threshold <= *s) {
                stack.pop();
                continue;
            }
            stack.push((u, Some(threshold)));
            break;
        }
    }

    let mut out = Vec::new();
    let mut last_active = stack[0].0;
    for (k, (idx, start)) in stack.iter().enumerate() {
        let lo = match start {
            Some(s) if s > from => s.clone(),
            _ => from.clone(),
        };
        let hi = match stack.get(k + 1) {
            Some((_, Some(next))) if next < to => next.clone(),
            _ => to.clone(),
        };
        if lo >= hi {
            continue;
        }
        let tr = &trajectories[*idx];
        last_active = *idx;
        push_vertex(
            &mut out,
            Vertex {
                v: tr.evaluate(&lo),
                q: lo.clone(),
                owner: tr.point().clone(),
            },
        );
        if let Some(b) = tr.breakpoint() {
            if lo < b && b < hi {
                push_vertex(
                    &mut out,
                    Vertex {
                        v: tr.evaluate(&b),
                        q: b,
                        owner: tr.point().clone(),
                    },
                );
            }
        }
    }
    let tr = &trajectories[last_active];
    push_vertex(
        &mut out,
        Vertex {
            v: tr.evaluate(to),
            q: to.clone(),
            owner: tr.point().clone(),
        },
    );
    Ok(out)
}

/// `Γ_ξ`: the two minima functions, the local maxima `q_n` of `L_{ξ,1}` and, per interval
/// `[q_{n−1}, q_n]`, the number of local maxima of `L_{ξ,2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinedGraph {
    xi: Rational,
    l1: PiecewiseLinear,
    l2: PiecewiseLinear,
    q_maxima: Vec<LogCoord>,
    interval_max_counts: Vec<usize>,
    s_detected: Option<usize>,
    truncated: bool,
}

impl CombinedGraph {
    /// `‖ξ‖` for which the graph was built.
    pub fn xi(&self) -> &Rational {
        &self.xi
    }

    pub fn l1(&self) -> &PiecewiseLinear {
        &self.l1
    }

    pub fn l2(&self) -> &PiecewiseLinear {
        &self.l2
    }

    /// `q_0 = 0, q_1, …` (up to the truncation depth).
    pub fn q_maxima(&self) -> &[LogCoord] {
        &self.q_maxima
    }

    pub fn interval_max_counts(&self) -> &[usize] {
        &self.interval_max_counts
    }

    /// `s` when the tail was reached, `None` when the expansion exceeds the depth.
    pub fn s_detected(&self) -> Option<usize> {
        self.s_detected
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Number of complete intervals `[q_{n−1}, q_n]`.
    pub fn intervals(&self) -> usize {
        self.q_maxima.len() - 1
    }

    /// Sorted union of the vertex abscissae of both functions.
    pub fn abscissae(&self) -> Vec<LogCoord> {
        let mut qs: Vec<LogCoord> = self
            .l1
            .vertices()
            .iter()
            .chain(self.l2.vertices())
            .map(|v| v.q.clone())
            .collect();
        qs.sort();
        qs.dedup();
        qs
    }
}

impl Serialize for CombinedGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CombinedGraph", 6)?;
        st.serialize_field("xi", &format_rational(&self.xi))?;
        st.serialize_field("L1", self.l1.vertices())?;
        st.serialize_field("L2", self.l2.vertices())?;
        st.serialize_field("q_maxima", &self.q_maxima)?;
        st.serialize_field("counts", &self.interval_max_counts)?;
        st.serialize_field("truncated", &self.truncated)?;
        st.end()
    }
}

fn trajectory(table: &ConvergentTable, n: isize) -> Trajectory {
    Trajectory::new(table.point(n), table.xi()).expect("convergents are nonzero")
}

/// Builds `Γ_ξ` (which equals `Γ_‖ξ‖`) exactly, stopping after `depth` complete intervals.
pub fn build_graph(xi: &Rational, depth: Option<usize>) -> CombinedGraph {
    let xi = normalize(xi);
    let cf = CfExpansion::expand(&xi).expect("normalized value lies in [0, 1/2]");
    let table = ConvergentTable::new(&cf);
    let s = table.s();
    let complete = (s - 1).min(depth.unwrap_or(DEFAULT_DEPTH));
    let truncated = complete < s - 1;

    let zero = LogCoord::zero();
    let mut q_maxima = vec![zero.clone()];
    let mut crossing_values = vec![];
    for n in 1..=complete as isize {
        let (q, v) = crossing(&trajectory(&table, n - 1), &trajectory(&table, n))
            .expect("consecutive convergent trajectories meet once");
        q_maxima.push(q);
        crossing_values.push(v);
    }

    // First minimum.
    let x0 = trajectory(&table, 0);
    let mut l1 = vec![Vertex {
        q: zero.clone(),
        v: x0.evaluate(&zero),
        owner: x0.point().clone(),
    }];
    for n in 1..=complete {
        let prev = trajectory(&table, n as isize - 1);
        let b = prev
            .breakpoint()
            .expect("Δ_{n−1} > 0 before the last convergent");
        push_vertex(
            &mut l1,
            Vertex {
                v: prev.evaluate(&b),
                q: b,
                owner: prev.point().clone(),
            },
        );
        push_vertex(
            &mut l1,
            Vertex {
                q: q_maxima[n].clone(),
                v: crossing_values[n - 1].clone(),
                owner: table.point(n as isize).clone(),
            },
        );
    }
    let l1_tail = if truncated {
        Tail::Truncated
    } else {
        Tail::Ray(Slope::Down)
    };
    let l1 = PiecewiseLinear::new(drop_redundant(l1), l1_tail).expect("L1 has slopes ±1");

    // Second minimum.
    let mut l2 = Vec::new();
    if s == 1 {
        let x_m1 = trajectory(&table, -1);
        l2.push(Vertex {
            q: zero.clone(),
            v: x_m1.evaluate(&zero),
            owner: x_m1.point().clone(),
        });
    }
    for n in 1..=complete {
        let trajs: Vec<Trajectory> = table
            .semiconvergents(n)
            .expect("1 ≤ n < s")
            .iter()
            .map(|sc| Trajectory::new(&sc.point, &xi).expect("x_{n,t} is nonzero"))
            .collect();
        let piece = lower_envelope(&trajs, &q_maxima[n - 1], &q_maxima[n])
            .expect("semiconvergent trajectories are ordered");
        for v in piece {
            push_vertex(&mut l2, v);
        }
    }
    if !truncated && s >= 2 {
        l2.last_mut().expect("at least one interval").owner = table.point(s as isize - 2).clone();
    }
    let l2_tail = if truncated {
        Tail::Truncated
    } else {
        Tail::Ray(Slope::Up)
    };
    let l2 = PiecewiseLinear::new(drop_redundant(l2), l2_tail).expect("L2 has slopes ±1");

    let mut graph = CombinedGraph {
        xi,
        l1,
        l2,
        q_maxima,
        interval_max_counts: Vec::new(),
        s_detected: (!truncated).then_some(s),
        truncated,
    };
    graph.interval_max_counts = (1..=complete)
        .map(|n| {
            interval_local_maxima(&graph, n)
                .expect("n within range")
                .len()
        })
        .collect();
    graph
}

/// Local maxima of `L_{ξ,2}` restricted to `[q_{n−1}, q_n]`, for `1 ≤ n ≤ intervals`.
pub fn interval_local_maxima(graph: &CombinedGraph, n: usize) -> Result<Vec<(LogCoord, LogCoord)>> {
    if n == 0 || n > graph.intervals() {
        return Err(Error::IndexOutOfRange {
            index: n as i64,
            lo: 1,
            hi: graph.intervals() as i64,
        });
    }
    graph
        .l2
        .local_maxima_on(&graph.q_maxima[n - 1], &graph.q_maxima[n])
}

/// Reads the continued fraction of `‖ξ‖` off the graph: the local maxima of `L_{ξ,1}`
/// delimit the intervals, and `a_n` is the number of local maxima of `L_{ξ,2}` on the
/// `n`-th one. A truncated graph yields only a prefix, reported as an error.
pub fn decode(graph: &CombinedGraph) -> Result<CfExpansion> {
    let maxima: Vec<LogCoord> = graph
        .l1
        .local_maxima()
        .into_iter()
        .map(|(q, _)| q)
        .collect();
    if maxima.first() != Some(&LogCoord::zero()) {
        return Err(Error::Precondition(
            "L1 has no local maximum at q = 0".into(),
        ));
    }
    let mut quotients = Vec::with_capacity(maxima.len().saturating_sub(1));
    for w in maxima.windows(2) {
        quotients.push(BigInt::from(graph.l2.local_maxima_on(&w[0], &w[1])?.len()));
    }
    if graph.truncated {
        return Err(Error::Truncated {
            prefix: quotients.iter().map(ToString::to_string).collect(),
        });
    }
    if quotients.last().is_some_and(|a| *a < BigInt::from(2)) {
        return Err(Error::Precondition(format!(
            "decoded expansion {quotients:?} is not canonical"
        )));
    }
    CfExpansion::from_quotients(quotients)
}

/// `(L_{ξ,1}(q), L_{ξ,2}(q))` by exact interpolation along the stored segments.
pub fn evaluate_graph(graph: &CombinedGraph, q: &LogCoord) -> Result<(LogCoord, LogCoord)> {
    if *q < LogCoord::zero() {
        return Err(Error::OutOfRange { q: q.to_string() });
    }
    Ok((graph.l1.evaluate(q)?, graph.l2.evaluate(q)?))
}
