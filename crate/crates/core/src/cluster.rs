//! Single-linkage clustering of arm means and the objects built on it.
//!
//! All distances here are squared Euclidean. Cluster labels are stored
//! 0-based; [`ClusterAssignment::one_based`] gives the conventional `[1, 1, 2, ...]`
//! form used in reports.

use std::fmt;

use crate::error::ClusterError;
use crate::means::MeanMatrix;
use crate::scalar::Real;

/// A partition of the arms into `K` labelled clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    /// `labels[m]` is the 0-based cluster of arm `m`; every label in `0..k` must occur.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self, ClusterError> {
        let mut seen = vec![false; k];
        for &l in &labels {
            if l >= k {
                return Err(ClusterError::InvalidLabels { k });
            }
            seen[l] = true;
        }
        if k == 0 || seen.iter().any(|s| !s) {
            return Err(ClusterError::InvalidLabels { k });
        }
        Ok(Self { labels, k })
    }

    /// Parses 1-based labels such as `[1, 1, 2, 2, 3]`; `K` is the largest label.
    pub fn from_one_based(labels: &[usize]) -> Result<Self, ClusterError> {
        let k = labels.iter().copied().max().unwrap_or(0);
        if labels.contains(&0) {
            return Err(ClusterError::InvalidLabels { k });
        }
        Self::new(labels.iter().map(|l| l - 1).collect(), k)
    }

    /// Relabels clusters by first occurrence in arm order.
    fn from_roots(roots: &[usize]) -> Self {
        let mut map: Vec<Option<usize>> = vec![None; roots.len()];
        let mut next = 0;
        let labels = roots
            .iter()
            .map(|&r| {
                *map[r].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Self { labels, k: next }
    }

    /// The same partition with first-occurrence labels.
    pub fn canonical(&self) -> Self {
        Self::from_roots(&self.labels)
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    #[inline]
    pub fn num_clusters(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn num_arms(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn cluster_of(&self, m: usize) -> usize {
        self.labels[m]
    }

    /// Arms of each cluster, in increasing arm order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (m, &l) in self.labels.iter().enumerate() {
            out[l].push(m);
        }
        out
    }

    /// Equality up to a permutation of labels.
    pub fn equivalent(&self, other: &Self) -> Result<bool, ClusterError> {
        cluster_equivalent(self, other)
    }
}

impl fmt::Display for ClusterAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", l + 1)?;
        }
        write!(f, "]")
    }
}

/// True iff some permutation of cluster labels maps `c2` onto `c1`.
pub fn cluster_equivalent(c1: &ClusterAssignment, c2: &ClusterAssignment) -> Result<bool, ClusterError> {
    if c1.num_arms() != c2.num_arms() {
        return Err(ClusterError::DimensionMismatch { expected: c1.num_arms(), got: c2.num_arms() });
    }
    if c1.k != c2.k {
        return Err(ClusterError::InvalidClusterCount { k: c2.k, m: c2.num_arms() });
    }
    Ok(c1.canonical().labels == c2.canonical().labels)
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// All arm pairs `(d_ij, i, j)` with `i < j`, sorted by distance then by `(i, j)`.
fn sorted_edges<T: Real>(means: &MeanMatrix<T>, arms: &[usize]) -> Vec<(T, usize, usize)> {
    let mut edges = Vec::with_capacity(arms.len() * arms.len().saturating_sub(1) / 2);
    for (a, &i) in arms.iter().enumerate() {
        for &j in &arms[a + 1..] {
            edges.push((means.sq_dist(i, j), i, j));
        }
    }
    edges.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite distances").then((x.1, x.2).cmp(&(y.1, y.2))));
    edges
}

/// Agglomerative single-linkage clustering of the arm means down to `k` clusters.
///
/// Merging in order of increasing edge length is Kruskal's algorithm, so equal
/// distances are resolved by the lexicographically smallest arm pair.
pub fn slink_cluster<T: Real>(means: &MeanMatrix<T>, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let m = means.arms();
    if k == 0 || k > m {
        return Err(ClusterError::InvalidClusterCount { k, m });
    }
    let arms: Vec<usize> = (0..m).collect();
    let mut sets = DisjointSets::new(m);
    let mut components = m;
    for (_, i, j) in sorted_edges(means, &arms) {
        if components == k {
            break;
        }
        if sets.union(i, j) {
            components -= 1;
        }
    }
    let roots: Vec<usize> = (0..m).map(|i| sets.find(i)).collect();
    Ok(ClusterAssignment::from_roots(&roots))
}

/// Splits `arms` into two groups with single linkage.
///
/// Returns the two groups and the closest cross pair `(a, b)` with `a < b`; that pair
/// is the last edge Kruskal adds, i.e. the bottleneck of the minimum spanning tree.
pub fn slink_split<T: Real>(means: &MeanMatrix<T>, arms: &[usize]) -> Option<(Vec<usize>, Vec<usize>, (usize, usize))> {
    if arms.len() < 2 {
        return None;
    }
    let mut sets = DisjointSets::new(means.arms());
    let mut components = arms.len();
    let mut bridge = None;
    for (_, i, j) in sorted_edges(means, arms) {
        if sets.find(i) == sets.find(j) {
            continue;
        }
        if components == 2 {
            bridge = Some((i, j));
            break;
        }
        sets.union(i, j);
        components -= 1;
    }
    let bridge = bridge?;
    let root = sets.find(bridge.0);
    let (p1, p2): (Vec<usize>, Vec<usize>) = arms.iter().partition(|&&a| sets.find(a) == root);
    Some((p1, p2, bridge))
}

/// `d_INTER`: the smallest squared distance between arms of different clusters.
pub fn inter_distance<T: Real>(means: &MeanMatrix<T>, c: &ClusterAssignment) -> Result<T, ClusterError> {
    check_shape(means, c)?;
    if c.num_clusters() < 2 {
        return Err(ClusterError::InvalidClusterCount { k: c.num_clusters(), m: c.num_arms() });
    }
    let mut best = T::infinity();
    for i in 0..c.num_arms() {
        for j in i + 1..c.num_arms() {
            if c.cluster_of(i) != c.cluster_of(j) {
                best = best.min(means.sq_dist(i, j));
            }
        }
    }
    Ok(best)
}

/// `d(k)` for one cluster: the best bipartition's smallest cross distance.
///
/// Equals the longest edge of the cluster's minimum spanning tree; 0 for singletons.
pub fn cluster_spread<T: Real>(means: &MeanMatrix<T>, members: &[usize]) -> T {
    slink_split(means, members).map_or(T::zero(), |(_, _, (a, b))| means.sq_dist(a, b))
}

/// `d_INTRA`: the largest [`cluster_spread`] over clusters.
pub fn intra_distance<T: Real>(means: &MeanMatrix<T>, c: &ClusterAssignment) -> Result<T, ClusterError> {
    check_shape(means, c)?;
    Ok(c.clusters().iter().map(|d| cluster_spread(means, d)).fold(T::zero(), T::max))
}

/// Strict separation `d_INTRA < d_INTER`.
pub fn is_separated<T: Real>(means: &MeanMatrix<T>, c: &ClusterAssignment) -> Result<bool, ClusterError> {
    Ok(intra_distance(means, c)? < inter_distance(means, c)?)
}

fn check_shape<T: Real>(means: &MeanMatrix<T>, c: &ClusterAssignment) -> Result<(), ClusterError> {
    if means.arms() != c.num_arms() {
        return Err(ClusterError::DimensionMismatch { expected: means.arms(), got: c.num_arms() });
    }
    Ok(())
}

/// One piece `(k, P1, P2, m, n)` of the alternative-set decomposition.
///
/// Its constraint set asks that every `a in P1`, `b in P2` end up at least as far
/// apart as arms `m` and `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AltSpec {
    pub cluster: usize,
    /// Contains the smallest arm of the cluster.
    pub part1: Vec<usize>,
    pub part2: Vec<usize>,
    /// `arm_m < arm_n`, in different clusters.
    pub arm_m: usize,
    pub arm_n: usize,
}

impl AltSpec {
    /// Builds a spec, normalizing part order and the pair order.
    pub fn new(cluster: usize, mut part1: Vec<usize>, mut part2: Vec<usize>, m: usize, n: usize) -> Self {
        part1.sort_unstable();
        part2.sort_unstable();
        if part2.first() < part1.first() {
            std::mem::swap(&mut part1, &mut part2);
        }
        Self { cluster, part1, part2, arm_m: m.min(n), arm_n: m.max(n) }
    }

    /// Arms appearing in a constraint, sorted and deduplicated.
    pub fn involved_arms(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.part1.iter().chain(&self.part2).copied().chain([self.arm_m, self.arm_n]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn is_single_pair(&self) -> bool {
        self.part1.len() == 1 && self.part2.len() == 1
    }
}

impl fmt::Display for AltSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[usize]| v.iter().map(|a| (a + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "cluster {} split {{{}}}|{{{}}} vs pair ({}, {})",
            self.cluster + 1,
            show(&self.part1),
            show(&self.part2),
            self.arm_m + 1,
            self.arm_n + 1
        )
    }
}

/// Unordered bipartitions `(P1, P2)` of `members`, `P1` holding the first member.
pub fn bipartitions(members: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = members.len();
    if n < 2 {
        return Vec::new();
    }
    let rest = &members[1..];
    let full = (1usize << (n - 1)) - 1;
    (0..full)
        .map(|mask| {
            let mut p1 = vec![members[0]];
            let mut p2 = Vec::new();
            for (i, &a) in rest.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    p1.push(a);
                } else {
                    p2.push(a);
                }
            }
            (p1, p2)
        })
        .collect()
}

/// Every `(k, P1, P2, m, n)` whose constraint sets cover the alternative set.
pub fn enumerate_alt_specs(c: &ClusterAssignment) -> Vec<AltSpec> {
    let m = c.num_arms();
    let pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).filter(|&(i, j)| c.cluster_of(i) != c.cluster_of(j)).collect();
    let mut specs = Vec::new();
    for (k, members) in c.clusters().iter().enumerate() {
        for (p1, p2) in bipartitions(members) {
            for &(i, j) in &pairs {
                specs.push(AltSpec { cluster: k, part1: p1.clone(), part2: p2.clone(), arm_m: i, arm_n: j });
            }
        }
    }
    specs
}

/// Largest `M` accepted by [`brute_force_slink_oracle`].
pub const ORACLE_MAX_ARMS: usize = 8;

/// Exhaustive search for the unique partition into `k` blocks with `d_INTRA < d_INTER`.
///
/// Independent of [`slink_cluster`]: partitions are enumerated as restricted growth
/// strings and `d(k)` is evaluated over every bipartition.
pub fn brute_force_slink_oracle<T: Real>(means: &MeanMatrix<T>, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let m = means.arms();
    if m > ORACLE_MAX_ARMS {
        return Err(ClusterError::OracleTooLarge { m, limit: ORACLE_MAX_ARMS });
    }
    if k == 0 || k > m {
        return Err(ClusterError::InvalidClusterCount { k, m });
    }
    let mut found = Vec::new();
    let mut labels = vec![0usize; m];
    restricted_growth(&mut labels, 1, 1, k, &mut |labels| {
        if separated_by_enumeration(means, labels, k) {
            found.push(labels.to_vec());
        }
    });
    match found.len() {
        1 => ClusterAssignment::new(found.pop().expect("one partition"), k),
        count => Err(ClusterError::NotUniquelySeparated { count }),
    }
}

fn restricted_growth(labels: &mut [usize], pos: usize, used: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    let m = labels.len();
    if pos == m {
        if used == k {
            visit(labels);
        }
        return;
    }
    // Not enough arms left to open the remaining blocks.
    if k - used.min(k) > m - pos {
        return;
    }
    for l in 0..(used + 1).min(k) {
        labels[pos] = l;
        restricted_growth(labels, pos + 1, used.max(l + 1), k, visit);
    }
}

fn separated_by_enumeration<T: Real>(means: &MeanMatrix<T>, labels: &[usize], k: usize) -> bool {
    let m = labels.len();
    let mut inter = T::infinity();
    for i in 0..m {
        for j in i + 1..m {
            if labels[i] != labels[j] {
                inter = inter.min(means.sq_dist(i, j));
            }
        }
    }
    let mut intra = T::zero();
    for block in 0..k {
        let members: Vec<usize> = (0..m).filter(|&i| labels[i] == block).collect();
        for (p1, p2) in bipartitions(&members) {
            let cross = p1.iter().flat_map(|&a| p2.iter().map(move |&b| (a, b))).map(|(a, b)| means.sq_dist(a, b));
            intra = intra.max(cross.fold(T::infinity(), T::min));
        }
    }
    intra < inter
}
