//! Tiling engines over the dual graph.
//!
//! * [`enumerate_tilings`] lists every tiling by plain backtracking. It is the
//!   reference oracle and is only practical for small regions.
//! * [`tgf`] sums the same tree but memoizes on the set of covered down
//!   triangles that can still matter, which makes the acceptance sweeps cheap.
//! * [`tgf_fast`] counts non-intersecting lozenge paths with a determinant.
//! * [`tgf_symmetric`] restricts to tilings fixed by the left-right mirror.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::LaurentPoly;
use crate::regions::{is_mirror_symmetric, mirror_cell, mirror_sum, Cell, Lozenge, LozengeKind, Region};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("region is not mirror symmetric")]
    Asymmetric,
    #[error("the path engine needs an unweighted left or right lozenge direction; this scheme weights both")]
    Unsupported,
}

pub type Tiling = Vec<Lozenge>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub down: usize,
    pub kind: LozengeKind,
    pub weight: LaurentPoly,
}

/// Bipartite adjacency of up and down triangles, both in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    pub ups: Vec<Cell>,
    pub downs: Vec<Cell>,
    pub edges: Vec<Vec<Edge>>,
}

impl DualGraph {
    pub fn is_balanced(&self) -> bool {
        self.ups.len() == self.downs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// For each down triangle, the largest index of an adjacent up triangle.
    fn last_neighbour(&self) -> Vec<Option<usize>> {
        let mut last = vec![None; self.downs.len()];
        for (i, es) in self.edges.iter().enumerate() {
            for e in es {
                last[e.down] = Some(i);
            }
        }
        last
    }
}

pub fn dual_graph(region: &Region) -> DualGraph {
    let ups: Vec<Cell> = region.ups().copied().collect();
    let downs: Vec<Cell> = region.downs().copied().collect();
    let index: HashMap<Cell, usize> = downs.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let edges = ups
        .iter()
        .map(|&u| {
            region
                .lozenges_at(u)
                .into_iter()
                .map(|l| Edge { down: index[&l.down()], kind: l.kind, weight: region.weight(&l) })
                .collect()
        })
        .collect();
    DualGraph { ups, downs, edges }
}

/// Small fixed-width bitset used as a memo key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn and(&self, mask: &Bits) -> Bits {
        Bits(self.0.iter().zip(&mask.0).map(|(a, b)| a & b).collect())
    }
}

/// Values the memoized search can sum: generating functions and plain counts.
trait Semiring: Clone {
    fn empty_sum() -> Self;
    fn empty_product() -> Self;
    fn add(&mut self, other: &Self);
    fn times(&self, other: &Self) -> Self;
}

impl Semiring for LaurentPoly {
    fn empty_sum() -> Self {
        LaurentPoly::zero()
    }
    fn empty_product() -> Self {
        LaurentPoly::one()
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

impl Semiring for BigInt {
    fn empty_sum() -> Self {
        Zero::zero()
    }
    fn empty_product() -> Self {
        One::one()
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
}

struct Memo<'g, T> {
    g: &'g DualGraph,
    weights: Vec<Vec<T>>,
    /// `closing[i]`: down triangles whose last neighbour is up `i`.
    closing: Vec<Vec<usize>>,
    /// `live[i]`: down triangles still adjacent to some up with index `>= i`.
    live: Vec<Bits>,
    table: HashMap<(usize, Bits), T>,
}

impl<'g, T: Semiring> Memo<'g, T> {
    fn run(g: &'g DualGraph, weights: Vec<Vec<T>>) -> T {
        if g.ups.is_empty() && g.downs.is_empty() {
            return T::empty_product();
        }
        if !g.is_balanced() {
            return T::empty_sum();
        }
        let last = g.last_neighbour();
        if last.iter().any(Option::is_none) {
            return T::empty_sum();
        }
        let n = g.ups.len();
        let mut closing = vec![Vec::new(); n];
        let mut live = vec![Bits::new(g.downs.len()); n + 1];
        for (d, l) in last.iter().enumerate() {
            let l = l.expect("checked above");
            closing[l].push(d);
            for mask in live.iter_mut().take(l + 1) {
                mask.set(d);
            }
        }
        let mut memo = Memo { g, weights, closing, live, table: HashMap::new() };
        let start = Bits::new(g.downs.len());
        memo.go(0, start)
    }

    fn go(&mut self, i: usize, covered: Bits) -> T {
        if i == self.g.ups.len() {
            return T::empty_product();
        }
        let key = (i, covered.and(&self.live[i]));
        if let Some(v) = self.table.get(&key) {
            return v.clone();
        }
        let mut total = T::empty_sum();
        for (e, edge) in self.g.edges[i].iter().enumerate() {
            if covered.get(edge.down) {
                continue;
            }
            let mut next = covered.clone();
            next.set(edge.down);
            if self.closing[i].iter().any(|&d| !next.get(d)) {
                continue;
            }
            let rest = self.go(i + 1, next);
            total.add(&self.weights[i][e].times(&rest));
        }
        self.table.insert(key, total.clone());
        total
    }
}

/// Tiling generating function: 1 for the empty region, 0 when there is no tiling.
pub fn tgf(region: &Region) -> LaurentPoly {
    let g = dual_graph(region);
    let weights = g.edges.iter().map(|es| es.iter().map(|e| e.weight.clone()).collect()).collect();
    Memo::run(&g, weights)
}

/// Number of tilings, ignoring weights.
pub fn count_tilings(region: &Region) -> BigInt {
    let g = dual_graph(region);
    let weights = g.edges.iter().map(|es| vec![BigInt::one(); es.len()]).collect();
    Memo::run(&g, weights)
}

fn backtrack(
    g: &DualGraph,
    i: usize,
    covered: &mut Bits,
    closing: &[Vec<usize>],
    cur: &mut Tiling,
    out: &mut Vec<Tiling>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if i == g.ups.len() {
        let mut t = cur.clone();
        t.sort();
        out.push(t);
        return;
    }
    for edge in &g.edges[i] {
        if covered.get(edge.down) {
            continue;
        }
        covered.set(edge.down);
        if closing[i].iter().all(|&d| covered.get(d)) {
            cur.push(Lozenge::new(g.ups[i], edge.kind));
            backtrack(g, i + 1, covered, closing, cur, out, limit);
            cur.pop();
        }
        covered.clear(edge.down);
    }
}

fn tilings_up_to(region: &Region, limit: usize) -> Vec<Tiling> {
    let g = dual_graph(region);
    if !g.is_balanced() {
        return Vec::new();
    }
    let last = g.last_neighbour();
    if last.iter().any(Option::is_none) {
        return Vec::new();
    }
    let mut closing = vec![Vec::new(); g.ups.len()];
    for (d, l) in last.iter().enumerate() {
        closing[l.expect("checked above")].push(d);
    }
    let mut out = Vec::new();
    backtrack(&g, 0, &mut Bits::new(g.downs.len()), &closing, &mut Vec::new(), &mut out, limit);
    out
}

/// Every tiling, in the deterministic order of the search (lowest up triangle first,
/// then its left, right and vertical lozenge). The empty region has one empty tiling.
pub fn enumerate_tilings(region: &Region) -> Vec<Tiling> {
    tilings_up_to(region, usize::MAX)
}

pub fn first_tiling(region: &Region) -> Option<Tiling> {
    tilings_up_to(region, 1).pop()
}

/// Sum over [`enumerate_tilings`] of the tiling weights. Slow; used to cross-check [`tgf`].
pub fn tgf_naive(region: &Region) -> LaurentPoly {
    enumerate_tilings(region).iter().map(|t| region.tiling_weight(t)).sum()
}

/// Generating function of the tilings fixed by the left-right mirror, with `X = Y = 1`.
pub fn tgf_symmetric(region: &Region) -> Result<LaurentPoly, EngineError> {
    if !is_mirror_symmetric(region) {
        return Err(EngineError::Asymmetric);
    }
    if region.is_empty() {
        return Ok(LaurentPoly::one());
    }
    let g = dual_graph(region);
    if !g.is_balanced() {
        return Ok(LaurentPoly::zero());
    }
    let c2 = mirror_sum(region);
    let up_index: HashMap<Cell, usize> = g.ups.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let down_index: HashMap<Cell, usize> = g.downs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let up_mirror: Vec<usize> = g.ups.iter().map(|&c| up_index[&mirror_cell(c, c2)]).collect();
    let down_mirror: Vec<usize> = g.downs.iter().map(|&c| down_index[&mirror_cell(c, c2)]).collect();
    let weight = |u: usize, kind: LozengeKind| region.weight(&Lozenge::new(g.ups[u], kind)).drop_xy();
    let last = g.last_neighbour();
    if last.iter().any(Option::is_none) {
        return Ok(LaurentPoly::zero());
    }
    let mut closing = vec![Vec::new(); g.ups.len()];
    for (d, l) in last.iter().enumerate() {
        closing[l.expect("checked above")].push(d);
    }

    struct Sym<'a, W> {
        g: &'a DualGraph,
        up_mirror: Vec<usize>,
        down_mirror: Vec<usize>,
        closing: Vec<Vec<usize>>,
        weight: W,
        table: HashMap<(usize, Bits, Bits), LaurentPoly>,
    }
    impl<W: Fn(usize, LozengeKind) -> LaurentPoly> Sym<'_, W> {
        fn go(&mut self, i: usize, ups: Bits, downs: Bits) -> LaurentPoly {
            if i == self.g.ups.len() {
                return LaurentPoly::one();
            }
            if ups.get(i) {
                return self.go(i + 1, ups, downs);
            }
            let key = (i, ups.clone(), downs.clone());
            if let Some(v) = self.table.get(&key) {
                return v.clone();
            }
            let mut total = LaurentPoly::zero();
            let mu = self.up_mirror[i];
            for edge in &self.g.edges[i] {
                let d = edge.down;
                let md = self.down_mirror[d];
                if downs.get(d) || (mu == i) != (md == d) {
                    continue;
                }
                let mut nu = ups.clone();
                let mut nd = downs.clone();
                nu.set(i);
                nd.set(d);
                let mut w = (self.weight)(i, edge.kind);
                if mu != i {
                    if nu.get(mu) || nd.get(md) {
                        continue;
                    }
                    nu.set(mu);
                    nd.set(md);
                    let mirrored = self.g.edges[mu].iter().find(|e| e.down == md).expect("mirror of a lozenge").kind;
                    w = &w * &(self.weight)(mu, mirrored);
                }
                if self.closing[i].iter().any(|&c| !nd.get(c)) {
                    continue;
                }
                let rest = self.go(i + 1, nu, nd);
                total += &(&w * &rest);
            }
            self.table.insert(key, total.clone());
            total
        }
    }
    let mut s = Sym { g: &g, up_mirror, down_mirror, closing, weight, table: HashMap::new() };
    let (nu, nd) = (Bits::new(g.ups.len()), Bits::new(g.downs.len()));
    Ok(s.go(0, nu, nd))
}

/// Which lozenge direction forms the background of the path picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Background {
    Right,
    Left,
}

fn uniform(region: &Region, kind: LozengeKind) -> bool {
    region.ups().all(|&u| region.lozenges_at(u).iter().filter(|l| l.kind == kind).all(|l| region.weight(l).is_one()))
}

/// Steps of a path starting from up triangle `u`: the lozenge kind, the down
/// triangle it covers, and the next up triangle if the path continues.
fn steps(region: &Region, bg: Background, u: Cell) -> Vec<(LozengeKind, Cell, Option<Cell>)> {
    let kinds = match bg {
        Background::Right => [LozengeKind::Left, LozengeKind::Vertical],
        Background::Left => [LozengeKind::Right, LozengeKind::Vertical],
    };
    kinds
        .into_iter()
        .filter_map(|kind| {
            let l = Lozenge::new(u, kind);
            let d = l.down();
            region.contains(&d).then(|| {
                let next = match bg {
                    Background::Right => Cell::up(d.row, d.h - 1),
                    Background::Left => Cell::up(d.row, d.h + 1),
                };
                (kind, d, region.contains(&next).then_some(next))
            })
        })
        .collect()
}

/// Determinant by cofactor expansion along rows, memoized on the set of used columns.
/// Division free, so it works over any commutative ring.
pub fn determinant(m: &[Vec<LaurentPoly>]) -> LaurentPoly {
    fn go(m: &[Vec<LaurentPoly>], row: usize, used: u64, memo: &mut HashMap<u64, LaurentPoly>) -> LaurentPoly {
        if row == m.len() {
            return LaurentPoly::one();
        }
        if let Some(v) = memo.get(&used) {
            return v.clone();
        }
        let mut total = LaurentPoly::zero();
        let mut sign_neg = false;
        for (c, entry) in m[row].iter().enumerate() {
            if used >> c & 1 == 1 {
                continue;
            }
            if !entry.is_zero() {
                let minor = go(m, row + 1, used | 1 << c, memo);
                let term = entry * &minor;
                total = if sign_neg { &total - &term } else { &total + &term };
            }
            sign_neg = !sign_neg;
        }
        memo.insert(used, total.clone());
        total
    }
    assert!(m.len() < 64, "determinant engine is limited to 63 paths");
    go(m, 0, 0, &mut HashMap::new())
}

fn permutation_sign(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut odd = false;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// Generating function from non-intersecting lozenge paths.
///
/// One diagonal lozenge direction must carry weight 1 everywhere; its lozenges
/// are the background and the paths run through the other two kinds. The
/// determinant's sign is fixed by the permutation realised by one tiling.
pub fn tgf_fast(region: &Region) -> Result<LaurentPoly, EngineError> {
    if region.is_empty() {
        return Ok(LaurentPoly::one());
    }
    if !region.is_balanced() {
        return Ok(LaurentPoly::zero());
    }
    let bg = if uniform(region, LozengeKind::Right) {
        Background::Right
    } else if uniform(region, LozengeKind::Left) {
        Background::Left
    } else {
        return Err(EngineError::Unsupported);
    };
    let (side, sink_side) = match bg {
        Background::Right => (1, -1),
        Background::Left => (-1, 1),
    };
    let sources: Vec<Cell> =
        region.ups().filter(|u| !region.contains(&Cell::down(u.row, u.h + side))).copied().collect();
    let sinks: Vec<Cell> =
        region.downs().filter(|d| !region.contains(&Cell::up(d.row, d.h + sink_side))).copied().collect();
    if sources.len() != sinks.len() {
        return Ok(LaurentPoly::zero());
    }
    let sink_index: HashMap<Cell, usize> = sinks.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    // Path sums from each up triangle to every sink, filled bottom-up by memoized recursion.
    fn paths(
        region: &Region,
        bg: Background,
        u: Cell,
        sink_index: &HashMap<Cell, usize>,
        memo: &mut BTreeMap<Cell, Vec<LaurentPoly>>,
    ) -> Vec<LaurentPoly> {
        if let Some(v) = memo.get(&u) {
            return v.clone();
        }
        let mut out = vec![LaurentPoly::zero(); sink_index.len()];
        for (kind, d, next) in steps(region, bg, u) {
            let w = region.weight(&Lozenge::new(u, kind));
            match next {
                Some(n) => {
                    for (slot, p) in out.iter_mut().zip(paths(region, bg, n, sink_index, memo)) {
                        *slot += &(&w * &p);
                    }
                }
                None => {
                    if let Some(&j) = sink_index.get(&d) {
                        out[j] += &w;
                    }
                }
            }
        }
        memo.insert(u, out.clone());
        out
    }
    let mut memo = BTreeMap::new();
    let matrix: Vec<Vec<LaurentPoly>> = sources.iter().map(|&s| paths(region, bg, s, &sink_index, &mut memo)).collect();
    let Some(tiling) = first_tiling(region) else {
        return Ok(LaurentPoly::zero());
    };
    let by_up: HashMap<Cell, LozengeKind> = tiling.iter().map(|l| (l.up, l.kind)).collect();
    let mut perm = Vec::with_capacity(sources.len());
    for &s in &sources {
        let mut u = s;
        loop {
            let kind = by_up[&u];
            let (_, d, next) = steps(region, bg, u)
                .into_iter()
                .find(|(k, _, _)| *k == kind)
                .expect("path lozenges are never background lozenges");
            match next {
                Some(n) => u = n,
                None => {
                    perm.push(sink_index[&d]);
                    break;
                }
            }
        }
    }
    let det = determinant(&matrix);
    Ok(if permutation_sign(&perm) { -det } else { det })
}

/// Sum of `q^|pi|` over plane partitions `pi` in an `a x b x c` box, by direct enumeration.
pub fn pp_box_oracle(a: i64, b: i64, c: i64) -> LaurentPoly {
    if a <= 0 || b <= 0 {
        return LaurentPoly::one();
    }
    // Rows are weakly decreasing sequences bounded entrywise by the row above.
    fn rows_below(bound: &[i64]) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for (j, &cap) in bound.iter().enumerate() {
            let mut next = Vec::new();
            for prefix in &out {
                let top = if j == 0 { cap } else { cap.min(prefix[j - 1]) };
                for v in 0..=top {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
    fn go(left: i64, bound: Vec<i64>, memo: &mut HashMap<(i64, Vec<i64>), LaurentPoly>) -> LaurentPoly {
        if left == 0 {
            return LaurentPoly::one();
        }
        if let Some(v) = memo.get(&(left, bound.clone())) {
            return v.clone();
        }
        let mut total = LaurentPoly::zero();
        for row in rows_below(&bound) {
            let size: i64 = row.iter().sum();
            total += &go(left - 1, row, memo).shift(crate::exactalg::Monomial::q(size));
        }
        memo.insert((left, bound), total.clone());
        total
    }
    go(a, vec![c.max(0); b as usize], &mut HashMap::new())
}

/// Engine choice exposed to callers such as the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Brute,
    Fast,
    Naive,
}

pub fn tgf_with(region: &Region, engine: Engine) -> Result<LaurentPoly, EngineError> {
    match engine {
        Engine::Brute => Ok(tgf(region)),
        Engine::Fast => tgf_fast(region),
        Engine::Naive => Ok(tgf_naive(region)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qformulas::{pp_q_poly, Quartered, TwoSided};
    use crate::regions::{build_q, build_s, AxisRule, Family, Params, WeightScheme, Weighted};
    use std::collections::BTreeSet;

    fn plain(cells: &[Cell]) -> Region {
        let scheme = WeightScheme {
            variant: Family::S,
            weighted: Weighted::Vertical,
            axis_h: 0,
            slope: 0,
            on_axis_rule: AxisRule::Normal,
            xy: true,
        };
        Region::new(Family::S, Params::default(), cells.iter().copied().collect::<BTreeSet<_>>(), scheme)
    }

    #[test]
    fn empty_and_unbalanced() {
        let e = plain(&[]);
        assert_eq!(enumerate_tilings(&e), vec![Vec::<Lozenge>::new()]);
        assert!(tgf(&e).is_one());
        let u = plain(&[Cell::up(1, 0)]);
        assert!(tgf(&u).is_zero());
        assert!(enumerate_tilings(&u).is_empty());
    }

    #[test]
    fn single_lozenge_graph() {
        let r = plain(&[Cell::up(1, 0), Cell::down(1, 1)]);
        let g = dual_graph(&r);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(enumerate_tilings(&r).len(), 1);
    }

    #[test]
    fn memo_matches_naive_on_s() {
        let spec = TwoSided::new(vec![2, 4], vec![1, 3]).unwrap();
        for x in 0..3 {
            let r = build_s(x, &spec).unwrap();
            assert_eq!(tgf(&r), tgf_naive(&r), "x = {x}");
            assert_eq!(tgf_fast(&r).unwrap(), tgf(&r), "x = {x}");
        }
    }

    #[test]
    fn q_first_dent_has_one_tiling() {
        for x in 0..4 {
            let r = build_q(x, &Quartered::new(vec![1]).unwrap()).unwrap();
            assert!(tgf(&r).is_one());
            assert_eq!(count_tilings(&r), BigInt::one());
        }
    }

    #[test]
    fn box_oracle_small() {
        assert_eq!(pp_box_oracle(1, 1, 1), "1 + q".parse().unwrap());
        assert!(pp_box_oracle(0, 2, 2).is_one());
        assert_eq!(pp_box_oracle(2, 2, 2), pp_q_poly(2, 2, 2));
    }

    #[test]
    fn determinant_two_by_two() {
        let p = |s: &str| -> LaurentPoly { s.parse().unwrap() };
        let m = vec![vec![p("1 + q"), p("2")], vec![p("q"), p("3")]];
        assert_eq!(determinant(&m), p("3 + q"));
    }
}
