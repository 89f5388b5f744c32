//! Bounding-volume hierarchy over a triangle soup.

use crate::geom::{intersect_triangle, Aabb, Ray, Vec3};
use crate::scalar::Real;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
enum Node<T: Real> {
    Leaf { bounds: Aabb<T>, first: u32, count: u32 },
    Inner { bounds: Aabb<T>, left: u32, right: u32 },
}

impl<T: Real> Node<T> {
    fn bounds(&self) -> &Aabb<T> {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Nearest intersection: ray parameter and triangle index in the original input order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<T> {
    pub t: T,
    pub triangle: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh<T: Real> {
    positions: Vec<Vec3<T>>,
    triangles: Vec<[u32; 3]>,
    /// Triangle indices in leaf order.
    order: Vec<u32>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> Bvh<T> {
    /// Builds by median split of triangle centroids along the widest centroid axis.
    pub fn build(positions: Vec<Vec3<T>>, triangles: Vec<[u32; 3]>) -> Self {
        let tri_bounds: Vec<Aabb<T>> = triangles
            .iter()
            .map(|t| Aabb::from_points(t.iter().map(|&i| positions[i as usize])))
            .collect();
        let centroids: Vec<Vec3<T>> = tri_bounds.iter().map(Aabb::center).collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        if !triangles.is_empty() {
            build_node(&mut nodes, &mut order, 0, &tri_bounds, &centroids);
        }
        Self {
            positions,
            triangles,
            order,
            nodes,
        }
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.nodes.first().map_or_else(Aabb::empty, |n| *n.bounds())
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, index: u32) -> [Vec3<T>; 3] {
        self.triangles[index as usize].map(|i| self.positions[i as usize])
    }

    /// Unit geometric normal of a triangle (by winding).
    pub fn normal(&self, index: u32) -> Vec3<T> {
        let [a, b, c] = self.triangle(index);
        (b - a).cross(c - a).try_normalize().unwrap_or_else(Vec3::unit_z)
    }

    /// Nearest hit with `t_min < t < t_max`. Equal distances resolve to the lower triangle index.
    pub fn intersect(&self, ray: &Ray<T>, t_min: T, t_max: T) -> Option<Hit<T>> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<Hit<T>> = None;
        let mut limit = t_max;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ix) = stack.pop() {
            let node = &self.nodes[ix as usize];
            // inclusive of `limit` so that equal-distance ties are still visited
            let Some((enter, _)) = node.bounds().intersect_ray(ray, t_min, limit) else {
                continue;
            };
            if enter > limit {
                continue;
            }
            match *node {
                Node::Leaf { first, count, .. } => {
                    for &tri in &self.order[first as usize..(first + count) as usize] {
                        let [a, b, c] = self.triangle(tri);
                        let Some(t) = intersect_triangle(ray, a, b, c, t_min, t_max) else {
                            continue;
                        };
                        let better = match best {
                            None => true,
                            Some(h) => t < h.t || (t == h.t && tri < h.triangle),
                        };
                        if better {
                            best = Some(Hit { t, triangle: tri });
                            limit = t;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}

fn build_node<T: Real>(
    nodes: &mut Vec<Node<T>>,
    order: &mut [u32],
    offset: u32,
    tri_bounds: &[Aabb<T>],
    centroids: &[Vec3<T>],
) -> u32 {
    let bounds = order
        .iter()
        .fold(Aabb::empty(), |b, &t| b.union(tri_bounds[t as usize]));
    let ix = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            bounds,
            first: offset,
            count: order.len() as u32,
        });
        return ix;
    }
    let axis = Aabb::from_points(order.iter().map(|&t| centroids[t as usize])).largest_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis]
            .partial_cmp(&centroids[b as usize][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    nodes.push(Node::Leaf {
        bounds,
        first: 0,
        count: 0,
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(nodes, lo, offset, tri_bounds, centroids);
    let right = build_node(nodes, hi, offset + mid as u32, tri_bounds, centroids);
    nodes[ix as usize] = Node::Inner { bounds, left, right };
    ix
}
