//! Nodal-domain counting by grid sampling and union-find labeling.
//!
//! The eigenfunction is sampled on a uniform grid over the domain's bounding
//! box; points within two grid cells of either boundary are excluded, values
//! inside a small band around zero are left unlabeled (the nodal set has
//! measure zero but finite grids need a band), and the remaining sign field
//! is labeled with 4-connectivity. Stability under grid refinement is the
//! correctness check.

use super::AnalysisError;
use crate::geometry::{DoublyConnectedDomain, Point};

const MIN_RESOLUTION: usize = 256;

/// Result of one nodal count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodalReport {
    pub resolution: usize,
    pub count: usize,
    /// Labeled points per component, largest first.
    pub component_sizes: Vec<usize>,
    pub zero_band_points: usize,
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            self.parent[ra as usize] = rb;
            self.size[rb as usize] += self.size[ra as usize];
        } else {
            self.parent[rb as usize] = ra;
            self.size[ra as usize] += self.size[rb as usize];
        }
    }
}

/// Count the nodal domains of `evaluate` on the domain interior.
///
/// `evaluate` receives a batch of interior points and returns the function
/// values; `zero_tol` is relative to the maximum sampled amplitude.
pub fn count_nodal_domains<F>(
    domain: &DoublyConnectedDomain,
    evaluate: F,
    resolution: usize,
    zero_tol: f64,
) -> Result<NodalReport, AnalysisError>
where
    F: Fn(&[Point]) -> Vec<f64>,
{
    if resolution < MIN_RESOLUTION {
        return Err(AnalysisError::GridTooCoarse {
            min: MIN_RESOLUTION,
            got: resolution,
        });
    }
    let radius = domain.circumscribed_radius;
    let cell = 2.0 * radius / (resolution - 1) as f64;
    // Euclidean two-cell band: the radial gap to a slanted outer boundary
    // underestimates the true distance by at most the slant factor.
    let outer_band = 2.0 * cell * (1.0 + domain.star_constant).sqrt();
    let inner_band = 2.0 * cell;

    let mut points = Vec::new();
    let mut grid_index = vec![u32::MAX; resolution * resolution];
    for iy in 0..resolution {
        let y = domain.center.y - radius + cell * iy as f64;
        for ix in 0..resolution {
            let x = domain.center.x - radius + cell * ix as f64;
            let local_x = x - domain.center.x;
            let local_y = y - domain.center.y;
            let r = (local_x * local_x + local_y * local_y).sqrt();
            if r <= domain.r1 + inner_band {
                continue;
            }
            let theta = local_y.atan2(local_x);
            if r >= domain.outer_curve.rho(theta) - outer_band {
                continue;
            }
            grid_index[iy * resolution + ix] = points.len() as u32;
            points.push(Point::new(x, y));
        }
    }
    if points.is_empty() {
        return Err(AnalysisError::EmptyInteriorSample(resolution));
    }

    let values = evaluate(&points);
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let band = zero_tol * max_abs;

    // Sign labels: -1, +1, or 0 inside the zero band.
    let sign = |idx: u32| -> i8 {
        let v = values[idx as usize];
        if v.abs() <= band {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };

    let mut uf = UnionFind::new(points.len());
    for iy in 0..resolution {
        for ix in 0..resolution {
            let here = grid_index[iy * resolution + ix];
            if here == u32::MAX || sign(here) == 0 {
                continue;
            }
            if ix + 1 < resolution {
                let right = grid_index[iy * resolution + ix + 1];
                if right != u32::MAX && sign(right) == sign(here) {
                    uf.union(here, right);
                }
            }
            if iy + 1 < resolution {
                let down = grid_index[(iy + 1) * resolution + ix];
                if down != u32::MAX && sign(down) == sign(here) {
                    uf.union(here, down);
                }
            }
        }
    }

    let mut component_size = std::collections::HashMap::new();
    let mut zero_band_points = 0;
    for idx in 0..points.len() as u32 {
        if sign(idx) == 0 {
            zero_band_points += 1;
            continue;
        }
        *component_size.entry(uf.find(idx)).or_insert(0usize) += 1;
    }
    let mut component_sizes: Vec<usize> = component_size.into_values().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));

    Ok(NodalReport {
        resolution,
        count: component_sizes.len(),
        component_sizes,
        zero_band_points,
    })
}
