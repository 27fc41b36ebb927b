//! Exact nearest-neighbor distance queries over a static point set.

use nalgebra::Point3;

use crate::Real;

const LEAF_SIZE: usize = 16;
const BLOCK_SIZE: usize = 8;

/// Squared Euclidean distance, evaluated in a fixed order so that every
/// caller gets bitwise-identical results for the same pair.
#[inline]
pub(crate) fn dist2<T: Real>(a: &Point3<T>, b: &Point3<T>) -> T {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

/// Balanced k-d tree stored implicitly: the node covering `points[lo..hi]`
/// splits at `points[(lo + hi) / 2]` along `axes[(lo + hi) / 2]`. Points are
/// kept in tree order. Each node keeps the tight bounding box of its points,
/// stored at its split index, or at `lo` for leaves.
pub struct KdTree<T: Real> {
    points: Vec<[T; 3]>,
    /// The same points split by coordinate, for leaf scans.
    soa: [Vec<T>; 3],
    axes: Vec<u8>,
    boxes: Vec<[[T; 3]; 2]>,
}

#[inline]
fn dist2_arr<T: Real>(q: &[T; 3], p: &[T; 3]) -> T {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    let dz = q[2] - p[2];
    dx * dx + dy * dy + dz * dz
}

/// Squared distance from `q` to a box. Rounding is monotone, so each per-axis
/// gap never exceeds the rounded coordinate difference to any point inside,
/// and the sum never exceeds that point's [`dist2`]: pruning on it is exact.
#[inline]
fn box_dist2<T: Real>(q: &[T; 3], b: &[[T; 3]; 2]) -> T {
    // At most one of the two terms is positive, so the sum is that gap exactly.
    let gap = |a: usize| (b[0][a] - q[a]).max(T::zero()) + (q[a] - b[1][a]).max(T::zero());
    let (gx, gy, gz) = (gap(0), gap(1), gap(2));
    gx * gx + gy * gy + gz * gz
}

#[inline]
fn min<T: Real>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Squared distance between two boxes, a lower bound on [`dist2`] between
/// any of their points; exact under rounding for the same reason.
#[inline]
fn box_box_dist2<T: Real>(a: &[[T; 3]; 2], b: &[[T; 3]; 2]) -> T {
    let gap = |k: usize| (b[0][k] - a[1][k]).max(T::zero()) + (a[0][k] - b[1][k]).max(T::zero());
    let (gx, gy, gz) = (gap(0), gap(1), gap(2));
    gx * gx + gy * gy + gz * gz
}

/// Interleaves the low 10 bits of `v` with two zero bits between each.
fn spread_bits(mut v: u64) -> u64 {
    v &= 0x3ff;
    v = (v | (v << 16)) & 0x0300_00ff;
    v = (v | (v << 8)) & 0x0300_f00f;
    v = (v | (v << 4)) & 0x030c_30c3;
    (v | (v << 2)) & 0x0924_9249
}

/// Indices of `points` sorted along a Z-order curve over their bounding box.
fn morton_order<T: Real>(points: &[[T; 3]]) -> Vec<usize> {
    let b = bounds(points);
    let lo: [f64; 3] = std::array::from_fn(|a| b[0][a].to_f64_lossy());
    let scale: [f64; 3] = std::array::from_fn(|a| {
        let ext = b[1][a].to_f64_lossy() - lo[a];
        if ext > 0.0 {
            1023.0 / ext
        } else {
            0.0
        }
    });
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let cell = |a: usize| (((p[a].to_f64_lossy() - lo[a]) * scale[a]) as u64).min(1023);
            (spread_bits(cell(0)) | spread_bits(cell(1)) << 1 | spread_bits(cell(2)) << 2, i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn bounds<T: Real>(points: &[[T; 3]]) -> [[T; 3]; 2] {
    let mut b = [points[0], points[0]];
    for p in points {
        for a in 0..3 {
            if p[a] < b[0][a] {
                b[0][a] = p[a];
            }
            if p[a] > b[1][a] {
                b[1][a] = p[a];
            }
        }
    }
    b
}

struct Block<T> {
    queries: [[T; 3]; BLOCK_SIZE],
    best: [T; BLOCK_SIZE],
    len: usize,
    bounds: [[T; 3]; 2],
}

impl<T: Real> Block<T> {
    #[inline]
    fn offer(&mut self, p: &[T; 3]) {
        for k in 0..BLOCK_SIZE {
            self.best[k] = min(self.best[k], dist2_arr(&self.queries[k], p));
        }
    }

    /// Largest running minimum: only nodes that might beat it are worth visiting.
    #[inline]
    fn worst(&self) -> T {
        self.best[..self.len].iter().fold(self.best[0], |m, &b| if b > m { b } else { m })
    }
}

impl<T: Real> KdTree<T> {
    pub fn new(points: &[Point3<T>]) -> Self {
        let n = points.len();
        let mut tree = Self {
            points: points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            soa: [Vec::new(), Vec::new(), Vec::new()],
            axes: vec![0; n],
            boxes: vec![[[T::zero(); 3]; 2]; n],
        };
        tree.build(0, n);
        tree.soa = std::array::from_fn(|a| tree.points.iter().map(|p| p[a]).collect());
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn node(lo: usize, hi: usize) -> usize {
        if hi - lo <= LEAF_SIZE {
            lo
        } else {
            (lo + hi) / 2
        }
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi == lo {
            return;
        }
        let b = bounds(&self.points[lo..hi]);
        self.boxes[Self::node(lo, hi)] = b;
        if hi - lo <= LEAF_SIZE {
            return;
        }
        let extent = [b[1][0] - b[0][0], b[1][1] - b[0][1], b[1][2] - b[0][2]];
        let axis = (0..3).fold(0, |best, a| if extent[a] > extent[best] { a } else { best });
        let mid = (lo + hi) / 2;
        self.points[lo..hi].select_nth_unstable_by(mid - lo, |p, q| {
            p[axis].partial_cmp(&q[axis]).unwrap_or(std::cmp::Ordering::Equal)
        });
        self.axes[mid] = axis as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// Smallest squared distance from `query` to any point strictly below
    /// `bound`, or `None` when no point is that close.
    pub fn nearest_dist2_within(&self, query: &Point3<T>, bound: T) -> Option<T> {
        let q = [query.x, query.y, query.z];
        let n = self.points.len();
        let mut best = bound;
        if n > 0 && box_dist2(&q, &self.boxes[Self::node(0, n)]) < best {
            self.search(&q, 0, n, &mut best);
        }
        (best < bound).then_some(best)
    }

    pub fn nearest_dist2(&self, query: &Point3<T>) -> Option<T> {
        self.nearest_dist2_within(query, T::max_value().unwrap_or_else(|| T::lit(f64::MAX)))
    }

    /// [`Self::nearest_dist2_within`] for every query. Queries are ordered
    /// along a Z-order curve and taken in small blocks that share one
    /// traversal, pruned by the gap between the block's box and each node's.
    pub fn nearest_dist2_within_all(&self, queries: &[Point3<T>], bound: T) -> Vec<Option<T>> {
        let mut out = vec![None; queries.len()];
        let n = self.points.len();
        if queries.is_empty() || n == 0 {
            return out;
        }
        let qs: Vec<[T; 3]> = queries.iter().map(|p| [p.x, p.y, p.z]).collect();
        let order = morton_order(&qs);
        for chunk in order.chunks(BLOCK_SIZE) {
            // Short blocks are padded with copies of their first query.
            let queries: [[T; 3]; BLOCK_SIZE] = std::array::from_fn(|k| qs[chunk.get(k).copied().unwrap_or(chunk[0])]);
            let mut block = Block {
                queries,
                best: [bound; BLOCK_SIZE],
                len: chunk.len(),
                bounds: bounds(&queries),
            };
            if box_box_dist2(&block.bounds, &self.boxes[Self::node(0, n)]) < bound {
                self.search_block(&mut block, 0, n);
            }
            for (k, &i) in chunk.iter().enumerate() {
                out[i] = (block.best[k] < bound).then_some(block.best[k]);
            }
        }
        out
    }

    fn search_block(&self, s: &mut Block<T>, lo: usize, hi: usize) {
        if hi - lo <= LEAF_SIZE {
            let b = &self.boxes[lo];
            for k in 0..s.len {
                let q = &s.queries[k];
                if box_dist2(q, b) < s.best[k] {
                    s.best[k] = self.scan(q, lo, hi, s.best[k]);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        s.offer(&self.points[mid]);
        let child = |a: usize, b: usize| (a, b, if b > a { box_box_dist2(&s.bounds, &self.boxes[Self::node(a, b)]) } else { s.worst() });
        let mut first = child(lo, mid);
        let mut second = child(mid + 1, hi);
        if second.2 < first.2 {
            std::mem::swap(&mut first, &mut second);
        }
        for (a, b, gap) in [first, second] {
            if gap < s.worst() {
                self.search_block(s, a, b);
            }
        }
    }

    /// Minimum of `best` and the squared distances from `q` to `points[lo..hi]`.
    #[inline]
    fn scan(&self, q: &[T; 3], lo: usize, hi: usize, best: T) -> T {
        let [xs, ys, zs] = &self.soa;
        let (xs, ys, zs) = (&xs[lo..hi], &ys[lo..hi], &zs[lo..hi]);
        // Independent lanes so the loop vectorizes.
        let mut m = [best; 4];
        let full = xs.len() / 4 * 4;
        for i in (0..full).step_by(4) {
            for l in 0..4 {
                let dx = q[0] - xs[i + l];
                let dy = q[1] - ys[i + l];
                let dz = q[2] - zs[i + l];
                m[l] = min(m[l], dx * dx + dy * dy + dz * dz);
            }
        }
        for i in full..xs.len() {
            let dx = q[0] - xs[i];
            let dy = q[1] - ys[i];
            let dz = q[2] - zs[i];
            m[0] = min(m[0], dx * dx + dy * dy + dz * dz);
        }
        min(min(m[0], m[1]), min(m[2], m[3]))
    }

    fn search(&self, q: &[T; 3], lo: usize, hi: usize, best: &mut T) {
        if hi - lo <= LEAF_SIZE {
            *best = self.scan(q, lo, hi, *best);
            return;
        }
        let mid = (lo + hi) / 2;
        *best = min(*best, dist2_arr(q, &self.points[mid]));
        let child = |a: usize, b: usize| (a, b, if b > a { box_dist2(q, &self.boxes[Self::node(a, b)]) } else { *best });
        let mut first = child(lo, mid);
        let mut second = child(mid + 1, hi);
        if second.2 < first.2 {
            std::mem::swap(&mut first, &mut second);
        }
        for (a, b, gap) in [first, second] {
            if gap < *best {
                self.search(q, a, b, best);
            }
        }
    }
}
