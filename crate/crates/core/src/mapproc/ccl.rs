//! Two-pass 8-connected component labelling with a union-find table.

use super::{DiffFrame, Mask};
use crate::geometry::Pixel;
use crate::ingest::GRID_SIZE;

/// A spatially connected group of changed pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Position in the deterministic (min row, min col) ordering.
    pub label: usize,
    /// Member pixels in row-major order.
    pub pixels: Vec<Pixel>,
    /// Member pixel nearest the centroid.
    pub midpoint: Pixel,
    pub first_seen: f64,
    pub last_seen: f64,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // keep the smaller provisional label as root
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Member pixel closest to the centroid; ties go to the earlier pixel in row-major order.
pub fn midpoint_of(pixels: &[Pixel]) -> Option<Pixel> {
    if pixels.is_empty() {
        return None;
    }
    let n = pixels.len() as f64;
    let cr = pixels.iter().map(|p| p.row as f64).sum::<f64>() / n;
    let cc = pixels.iter().map(|p| p.col as f64).sum::<f64>() / n;
    let mut sorted: Vec<Pixel> = pixels.to_vec();
    sorted.sort();
    sorted.into_iter().min_by(|a, b| {
        let da = (a.row as f64 - cr).powi(2) + (a.col as f64 - cc).powi(2);
        let db = (b.row as f64 - cr).powi(2) + (b.col as f64 - cc).powi(2);
        da.total_cmp(&db)
    })
}

/// Components of a mask, each as a row-major pixel list, ordered by their
/// first pixel in row-major order.
pub fn label_mask(mask: &Mask) -> Vec<Vec<Pixel>> {
    let n = GRID_SIZE;
    let mut labels = vec![usize::MAX; n * n];
    let mut parent: Vec<usize> = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if !mask.get_rc(r, c) {
                continue;
            }
            // already-visited neighbours: W, NW, N, NE
            let mut neighbours = [usize::MAX; 4];
            if c > 0 {
                neighbours[0] = labels[r * n + c - 1];
            }
            if r > 0 {
                if c > 0 {
                    neighbours[1] = labels[(r - 1) * n + c - 1];
                }
                neighbours[2] = labels[(r - 1) * n + c];
                if c + 1 < n {
                    neighbours[3] = labels[(r - 1) * n + c + 1];
                }
            }
            let mut current = usize::MAX;
            for &l in neighbours.iter().filter(|&&l| l != usize::MAX) {
                if current == usize::MAX {
                    current = l;
                } else {
                    union(&mut parent, current, l);
                }
            }
            if current == usize::MAX {
                current = parent.len();
                parent.push(current);
            }
            labels[r * n + c] = current;
        }
    }

    // second pass: resolve roots in order of first appearance
    let mut root_slot: Vec<usize> = vec![usize::MAX; parent.len()];
    let mut components: Vec<Vec<Pixel>> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        if label == usize::MAX {
            continue;
        }
        let root = find(&mut parent, label);
        if root_slot[root] == usize::MAX {
            root_slot[root] = components.len();
            components.push(Vec::new());
        }
        components[root_slot[root]].push(Pixel::from_index(i));
    }
    components
}

/// Connected segments of a diff's changed mask.
pub fn label_segments(diff: &DiffFrame) -> Vec<Segment> {
    label_mask(&diff.changed)
        .into_iter()
        .enumerate()
        .map(|(label, pixels)| Segment {
            label,
            midpoint: midpoint_of(&pixels).expect("components are non-empty"),
            pixels,
            first_seen: diff.t_curr,
            last_seen: diff.t_curr,
        })
        .collect()
}
