//! Sequential-impulse rigid-body stepping for convex bodies settling on a plate.
//!
//! The table plane and plate disk are tested per hull vertex. The rim is a ring of convex wall
//! pieces and, like body pairs, goes through a convex–convex contact query; body pairs add the
//! hull vertices lying on each other's faces so that flat stacks rest on several points.
//! Penetration left after integration is removed by direct position projection so that resting
//! bodies carry no bias velocity.

use super::dynamics::SimParams;
use super::{PlateSpec, RIM_WIDTH_M};
use crate::collide::ConvexShape;
use crate::error::{Error, Result};
use crate::{Pose, Quat, Vec3};
use std::collections::HashMap;

/// Speculative contact distance.
const CONTACT_MARGIN_M: f64 = 2e-3;
/// Penetration tolerated by the position projection.
const PENETRATION_SLOP_M: f64 = 1e-4;
const VELOCITY_ITERATIONS: usize = 16;
const PROJECTION_PASSES: usize = 4;
/// Approach speed below which contacts are treated as inelastic.
const RESTITUTION_THRESHOLD: f64 = 0.2;
const LINEAR_DAMPING: f64 = 0.05;
const ANGULAR_DAMPING: f64 = 0.6;
const FALLBACK_DENSITY_KG_M3: f64 = 1000.0;

#[derive(Debug, Clone)]
pub(crate) struct Body {
    pub key: String,
    /// Hull vertices about the centre of mass, body frame.
    pub local_points: Vec<Vec3>,
    pub shape: ConvexShape,
    /// Outward hull face planes `(n, d)` in the body frame, `n·p = d` on the face.
    planes: Vec<(Vec3, f64)>,
    /// Centre of mass in asset object coordinates.
    pub com_offset: Vec3,
    pub inv_mass: f64,
    pub mass: f64,
    /// Diagonal body-frame inverse inertia.
    pub inv_inertia: Vec3,
    pub bound_radius: f64,
    pub x: Vec3,
    pub q: Quat,
    pub v: Vec3,
    pub w: Vec3,
    pub still_time: f64,
    pub touched: bool,
}

impl Body {
    pub fn new(asset: &crate::asset::FoodAsset) -> Result<Self> {
        let (volume, centroid) = asset.mesh.volume_and_centroid();
        let com_offset = if volume > 0.0 {
            centroid
        } else {
            asset.collision_hull.centroid()
        };
        let local_points: Vec<Vec3> = asset
            .collision_hull
            .points
            .iter()
            .map(|&p| p - com_offset)
            .collect();
        let shape = ConvexShape::new(&local_points).ok_or_else(|| {
            Error::validation(
                "collision_hull",
                format!("asset `{}` has no solid hull and cannot be simulated", asset.asset_id),
            )
        })?;
        let planes = crate::collide::convex_hull(&local_points)
            .map(|(verts, tris)| {
                tris.iter()
                    .filter_map(|t| {
                        let [a, b, c] = t.map(|k| verts[k as usize]);
                        let n = (b - a).cross(c - a).try_normalize()?;
                        Some((n, n.dot(a)))
                    })
                    .collect()
            })
            .unwrap_or_default();
        let mut mass = asset.nutrition.mass_g / 1000.0;
        if mass <= 0.0 {
            mass = (volume.abs() * FALLBACK_DENSITY_KG_M3).max(1e-3);
        }
        // solid box of the hull extents
        let e = crate::Aabb::from_points(local_points.iter().copied()).extent();
        let k = mass / 12.0;
        let inertia = Vec3::new(
            k * (e.y * e.y + e.z * e.z),
            k * (e.x * e.x + e.z * e.z),
            k * (e.x * e.x + e.y * e.y),
        );
        let inv_inertia = Vec3::new(1.0 / inertia.x, 1.0 / inertia.y, 1.0 / inertia.z);
        let bound_radius = local_points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        Ok(Self {
            key: asset.asset_id.clone(),
            local_points,
            shape,
            planes,
            com_offset,
            inv_mass: 1.0 / mass,
            mass,
            inv_inertia,
            bound_radius,
            x: Vec3::zero(),
            q: Quat::identity(),
            v: Vec3::zero(),
            w: Vec3::zero(),
            still_time: 0.0,
            touched: false,
        })
    }

    pub fn com_pose(&self) -> Pose {
        Pose::new(self.x, self.q)
    }

    /// Pose of the asset's object frame.
    pub fn object_pose(&self) -> Pose {
        Pose::new(self.x - self.q.rotate(self.com_offset), self.q)
    }

    pub fn world_points(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.local_points.iter().map(move |&p| self.x + self.q.rotate(p))
    }

    /// Hull-vertex centroid in world space.
    pub fn hull_centroid(&self) -> Vec3 {
        let n = self.local_points.len().max(1) as f64;
        self.world_points().fold(Vec3::zero(), |a, p| a + p) / n
    }

    /// Largest face-plane distance of a world point: negative inside, and a lower bound on the
    /// true distance outside.
    fn plane_distance(&self, p: Vec3) -> f64 {
        let lp = self.q.inverse_rotate(p - self.x);
        self.planes
            .iter()
            .map(|&(n, d)| n.dot(lp) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[inline]
    fn apply_inv_inertia(&self, v: Vec3) -> Vec3 {
        let local = self.q.inverse_rotate(v).mul_elem(self.inv_inertia);
        self.q.rotate(local)
    }

    pub fn kinetic_energy(&self) -> f64 {
        let wl = self.q.inverse_rotate(self.w);
        let iw = Vec3::new(
            wl.x / self.inv_inertia.x,
            wl.y / self.inv_inertia.y,
            wl.z / self.inv_inertia.z,
        );
        0.5 * self.mass * self.v.norm_squared() + 0.5 * wl.dot(iw)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.q.is_finite() && self.v.is_finite() && self.w.is_finite()
    }
}

/// Identifies a contact across steps for warm starting: `(a, b, feature)`.
type ContactKey = (usize, usize, u64);
const STATIC_BODY: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Contact {
    key: ContactKey,
    a: usize,
    b: Option<usize>,
    ra: Vec3,
    rb: Vec3,
    /// Unit normal pushing body `a` out of `b` (or static geometry).
    n: Vec3,
    t1: Vec3,
    t2: Vec3,
    mass_n: f64,
    mass_t1: f64,
    mass_t2: f64,
    target_vn: f64,
    jn: f64,
    jt1: f64,
    jt2: f64,
}

/// Deepest static contact candidates for one world-space hull point:
/// `(normal, signed separation)`, negative when penetrating.
fn static_probe(p: Vec3, plate: &PlateSpec, margin: f64, out: &mut Vec<(Vec3, f64)>) {
    let up = Vec3::unit_z();
    let table = plate.table_z();
    let ground_sep = p.z - table;
    if ground_sep < margin {
        out.push((up, ground_sep));
    }
    let r = plate.radial_distance(p);
    let radial = if r > 1e-12 {
        Vec3::new((p.x - plate.center.x) / r, (p.y - plate.center.y) / r, 0.0)
    } else {
        Vec3::unit_x()
    };
    let big_r = plate.radius_m;
    let top = plate.top_z_m;
    if p.z <= table {
        return;
    }
    if r < big_r {
        let s_top = p.z - top;
        if s_top >= 0.0 {
            if s_top < margin {
                out.push((up, s_top));
            }
        } else if -s_top <= big_r - r {
            out.push((up, s_top));
        } else {
            out.push((radial, r - big_r));
        }
    } else if r < big_r + margin && p.z < top {
        out.push((radial, r - big_r));
    }
}

/// Number of convex wall pieces approximating the rim annulus.
const RIM_SEGMENTS: usize = 48;

/// Rim wall pieces in world coordinates, each the hull of an annular sector.
fn rim_segments(plate: &PlateSpec) -> Vec<ConvexShape> {
    if plate.rim_height_m <= 0.0 {
        return Vec::new();
    }
    let (r_in, r_out) = (plate.radius_m - RIM_WIDTH_M, plate.radius_m);
    let (z0, z1) = (plate.top_z_m - 1e-3, plate.top_z_m + plate.rim_height_m);
    (0..RIM_SEGMENTS)
        .filter_map(|k| {
            let a0 = std::f64::consts::TAU * k as f64 / RIM_SEGMENTS as f64;
            let a1 = std::f64::consts::TAU * (k + 1) as f64 / RIM_SEGMENTS as f64;
            let mut pts = Vec::with_capacity(8);
            for a in [a0, a1] {
                for r in [r_in, r_out] {
                    for z in [z0, z1] {
                        pts.push(Vec3::new(
                            plate.center.x + r * a.cos(),
                            plate.center.y + r * a.sin(),
                            z,
                        ));
                    }
                }
            }
            // centre the hull on its own origin; the pose carries it back
            ConvexShape::new(&pts)
        })
        .collect()
}

/// Most points kept from a face-contact patch.
const MANIFOLD_POINTS: usize = 4;

/// Hull vertices of either body lying within the contact margin of the other, reduced to the
/// deepest point and the extremes along the contact tangents. `n` points from `b` towards `a`.
/// Features are vertex indices, with bit 32 set for vertices of `b`.
fn pair_manifold(a: &Body, b: &Body, n: Vec3) -> Vec<(u64, Vec3, f64)> {
    let mut found: Vec<(u64, Vec3, f64)> = Vec::new();
    for (v, p) in a.world_points().enumerate() {
        let d = b.plane_distance(p);
        if d <= CONTACT_MARGIN_M {
            found.push((v as u64, p, d));
        }
    }
    for (v, p) in b.world_points().enumerate() {
        let d = a.plane_distance(p);
        if d <= CONTACT_MARGIN_M {
            found.push((1 << 32 | v as u64, p, d));
        }
    }
    if found.len() <= MANIFOLD_POINTS {
        return found;
    }
    let t1 = if n.x.abs() < 0.9 { n.cross(Vec3::unit_x()) } else { n.cross(Vec3::unit_y()) }.normalize();
    let t2 = n.cross(t1);
    let pick = |key: &dyn Fn(&(u64, Vec3, f64)) -> f64| {
        found.iter().enumerate().max_by(|x, y| key(x.1).total_cmp(&key(y.1))).map(|(k, _)| k).unwrap()
    };
    let mut keep = vec![
        pick(&|c| -c.2),
        pick(&|c| c.1.dot(t1)),
        pick(&|c| -c.1.dot(t1)),
        pick(&|c| c.1.dot(t2)),
        pick(&|c| -c.1.dot(t2)),
    ];
    keep.sort_unstable();
    keep.dedup();
    keep.into_iter().map(|k| found[k]).collect()
}

pub(crate) struct World<'a> {
    pub bodies: Vec<Body>,
    plate: &'a PlateSpec,
    params: &'a SimParams,
    /// Body indices in canonical (asset id) order.
    order: Vec<usize>,
    rim: Vec<ConvexShape>,
    contacts: Vec<Contact>,
    probe: Vec<(Vec3, f64)>,
    warm: HashMap<ContactKey, [f64; 3]>,
    pub step_index: u64,
    pub first_contact_energy: Option<f64>,
}

impl<'a> World<'a> {
    pub fn new(bodies: Vec<Body>, plate: &'a PlateSpec, params: &'a SimParams) -> Self {
        let mut order: Vec<usize> = (0..bodies.len()).collect();
        order.sort_by(|&i, &j| bodies[i].key.cmp(&bodies[j].key).then(i.cmp(&j)));
        Self {
            bodies,
            plate,
            params,
            order,
            rim: rim_segments(plate),
            contacts: Vec::new(),
            probe: Vec::new(),
            warm: HashMap::new(),
            step_index: 0,
            first_contact_energy: None,
        }
    }

    pub fn total_kinetic_energy(&self) -> f64 {
        self.bodies.iter().map(Body::kinetic_energy).sum()
    }

    pub fn all_settled(&self) -> bool {
        self.bodies
            .iter()
            .all(|b| b.still_time >= self.params.settle_hold_s)
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.params.timestep_s;
        let g = self.params.gravity;
        for b in &mut self.bodies {
            b.v += g * dt;
            b.v *= 1.0 / (1.0 + LINEAR_DAMPING * dt);
            b.w *= 1.0 / (1.0 + ANGULAR_DAMPING * dt);
        }

        self.collect_contacts();
        if self.first_contact_energy.is_none() && !self.contacts.is_empty() {
            self.first_contact_energy = Some(self.total_kinetic_energy());
        }
        for c in &self.contacts {
            self.bodies[c.a].touched = true;
            if let Some(b) = c.b {
                self.bodies[b].touched = true;
            }
        }
        self.solve_velocities();

        for b in &mut self.bodies {
            b.x += b.v * dt;
            b.q = (Quat::from_scaled_axis(b.w * dt) * b.q).normalize();
        }
        self.project_positions();

        self.step_index += 1;
        let eps = self.params.settle_speed_eps;
        for (i, b) in self.bodies.iter_mut().enumerate() {
            if !b.is_finite() {
                return Err(Error::Divergence {
                    step: self.step_index,
                    message: format!("body {i} (`{}`) has a non-finite state", b.key),
                });
            }
            // angular speed is compared as the speed of the farthest hull point
            if b.touched && b.v.norm() < eps && b.w.norm() * b.bound_radius < eps {
                b.still_time += dt;
            } else {
                b.still_time = 0.0;
            }
        }
        Ok(())
    }

    fn make_contact(&self, key: ContactKey, a: usize, b: Option<usize>, point: Vec3, n: Vec3, sep: f64) -> Contact {
        let ba = &self.bodies[a];
        let ra = point - ba.x;
        let rb = b.map(|j| point - self.bodies[j].x).unwrap_or_default();
        let t1 = if n.x.abs() < 0.9 {
            n.cross(Vec3::unit_x()).normalize()
        } else {
            n.cross(Vec3::unit_y()).normalize()
        };
        let t2 = n.cross(t1);
        let eff = |dir: Vec3| {
            let mut k = ba.inv_mass + ba.apply_inv_inertia(ra.cross(dir)).cross(ra).dot(dir);
            if let Some(j) = b {
                let bb = &self.bodies[j];
                k += bb.inv_mass + bb.apply_inv_inertia(rb.cross(dir)).cross(rb).dot(dir);
            }
            if k > 0.0 {
                1.0 / k
            } else {
                0.0
            }
        };
        let dt = self.params.timestep_s;
        let vn = self.relative_velocity(a, b, ra, rb).dot(n);
        let mut target_vn = if sep > 0.0 { -sep / dt } else { 0.0 };
        if vn < -RESTITUTION_THRESHOLD && vn * dt + sep < 0.0 {
            target_vn = target_vn.max(-self.params.restitution * vn);
        }
        let [jn, jt1, jt2] = self.warm.get(&key).copied().unwrap_or_default();
        Contact {
            key,
            a,
            b,
            ra,
            rb,
            n,
            t1,
            t2,
            mass_n: eff(n),
            mass_t1: eff(t1),
            mass_t2: eff(t2),
            target_vn,
            jn,
            jt1,
            jt2,
        }
    }

    fn relative_velocity(&self, a: usize, b: Option<usize>, ra: Vec3, rb: Vec3) -> Vec3 {
        let ba = &self.bodies[a];
        let mut v = ba.v + ba.w.cross(ra);
        if let Some(j) = b {
            let bb = &self.bodies[j];
            v -= bb.v + bb.w.cross(rb);
        }
        v
    }

    fn collect_contacts(&mut self) {
        self.contacts.clear();
        let mut contacts = Vec::new();
        let mut probe = std::mem::take(&mut self.probe);
        for &i in &self.order {
            let body = &self.bodies[i];
            for (v, p) in body.world_points().enumerate() {
                probe.clear();
                static_probe(p, self.plate, CONTACT_MARGIN_M, &mut probe);
                for (slot, &(n, sep)) in probe.iter().enumerate() {
                    let key = (i, STATIC_BODY, (v as u64) << 2 | slot as u64);
                    contacts.push(self.make_contact(key, i, None, p, n, sep));
                }
            }
        }
        self.probe = probe;
        let identity = Pose::identity();
        let rim_reach = self.plate.radius_m - RIM_WIDTH_M - CONTACT_MARGIN_M;
        for &i in &self.order {
            let body = &self.bodies[i];
            if self.plate.radial_distance(body.x) + body.bound_radius < rim_reach {
                continue;
            }
            for (k, seg) in self.rim.iter().enumerate() {
                if let Some(c) = body.shape.contact(&body.com_pose(), seg, &identity, CONTACT_MARGIN_M) {
                    let point = (c.point_a + c.point_b) * 0.5;
                    let key = (i, STATIC_BODY, u64::MAX - k as u64);
                    contacts.push(self.make_contact(key, i, None, point, -c.normal, c.dist));
                }
            }
        }
        for (k, &i) in self.order.iter().enumerate() {
            for &j in &self.order[k + 1..] {
                let (bi, bj) = (&self.bodies[i], &self.bodies[j]);
                if (bi.x - bj.x).norm() > bi.bound_radius + bj.bound_radius + CONTACT_MARGIN_M {
                    continue;
                }
                if let Some(c) =
                    bi.shape
                        .contact(&bi.com_pose(), &bj.shape, &bj.com_pose(), CONTACT_MARGIN_M)
                {
                    let n = -c.normal;
                    let point = (c.point_a + c.point_b) * 0.5;
                    contacts.push(self.make_contact((i, j, u64::MAX), i, Some(j), point, n, c.dist));
                    for (feature, p, sep) in pair_manifold(bi, bj, n) {
                        contacts.push(self.make_contact((i, j, feature), i, Some(j), p, n, sep));
                    }
                }
            }
        }
        self.contacts = contacts;
    }

    fn apply_impulse(&mut self, c: &Contact, impulse: Vec3) {
        let a = &mut self.bodies[c.a];
        a.v += impulse * a.inv_mass;
        let dw = a.apply_inv_inertia(c.ra.cross(impulse));
        a.w += dw;
        if let Some(j) = c.b {
            let b = &mut self.bodies[j];
            b.v -= impulse * b.inv_mass;
            let dw = b.apply_inv_inertia(c.rb.cross(impulse));
            b.w -= dw;
        }
    }

    fn solve_velocities(&mut self) {
        let mu = self.params.friction_coeff;
        let mut contacts = std::mem::take(&mut self.contacts);
        for c in &contacts {
            self.apply_impulse(c, c.n * c.jn + c.t1 * c.jt1 + c.t2 * c.jt2);
        }
        for _ in 0..VELOCITY_ITERATIONS {
            for c in contacts.iter_mut() {
                // friction first, bounded by the current normal impulse
                let vr = self.relative_velocity(c.a, c.b, c.ra, c.rb);
                let limit = mu * c.jn;
                let d1 = -vr.dot(c.t1) * c.mass_t1;
                let new1 = (c.jt1 + d1).clamp(-limit, limit);
                let d1 = new1 - c.jt1;
                c.jt1 = new1;
                let d2 = -vr.dot(c.t2) * c.mass_t2;
                let new2 = (c.jt2 + d2).clamp(-limit, limit);
                let d2 = new2 - c.jt2;
                c.jt2 = new2;
                self.apply_impulse(c, c.t1 * d1 + c.t2 * d2);

                let vn = self.relative_velocity(c.a, c.b, c.ra, c.rb).dot(c.n);
                let dn = (c.target_vn - vn) * c.mass_n;
                let new_n = (c.jn + dn).max(0.0);
                let dn = new_n - c.jn;
                c.jn = new_n;
                self.apply_impulse(c, c.n * dn);
            }
        }
        self.warm.clear();
        for c in &contacts {
            self.warm.insert(c.key, [c.jn, c.jt1, c.jt2]);
        }
        self.contacts = contacts;
    }

    fn project_positions(&mut self) {
        let mut probe = std::mem::take(&mut self.probe);
        for _ in 0..PROJECTION_PASSES {
            let mut moved = false;
            for k in 0..self.order.len() {
                let i = self.order[k];
                let mut deepest: Option<(Vec3, f64)> = None;
                for p in self.bodies[i].world_points() {
                    probe.clear();
                    static_probe(p, self.plate, 0.0, &mut probe);
                    for &(n, sep) in &probe {
                        if sep < -PENETRATION_SLOP_M && deepest.is_none_or(|(_, d)| sep < d) {
                            deepest = Some((n, sep));
                        }
                    }
                }
                let body = &self.bodies[i];
                if self.plate.radial_distance(body.x) + body.bound_radius
                    >= self.plate.radius_m - RIM_WIDTH_M
                {
                    for seg in &self.rim {
                        if let Some(c) = body.shape.contact(&body.com_pose(), seg, &Pose::identity(), 0.0) {
                            if c.dist < -PENETRATION_SLOP_M && deepest.is_none_or(|(_, d)| c.dist < d) {
                                deepest = Some((-c.normal, c.dist));
                            }
                        }
                    }
                }
                if let Some((n, sep)) = deepest {
                    self.bodies[i].x += n * (-sep - 0.5 * PENETRATION_SLOP_M);
                    moved = true;
                }
            }
            for k in 0..self.order.len() {
                for l in k + 1..self.order.len() {
                    let (i, j) = (self.order[k], self.order[l]);
                    let (bi, bj) = (&self.bodies[i], &self.bodies[j]);
                    if (bi.x - bj.x).norm() > bi.bound_radius + bj.bound_radius {
                        continue;
                    }
                    let Some(c) = bi.shape.contact(&bi.com_pose(), &bj.shape, &bj.com_pose(), 0.0)
                    else {
                        continue;
                    };
                    if c.dist >= -PENETRATION_SLOP_M {
                        continue;
                    }
                    let depth = -c.dist - 0.5 * PENETRATION_SLOP_M;
                    let total = bi.inv_mass + bj.inv_mass;
                    let (wi, wj) = (bi.inv_mass / total, bj.inv_mass / total);
                    // normal points from i toward j
                    self.bodies[i].x -= c.normal * (depth * wi);
                    self.bodies[j].x += c.normal * (depth * wj);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        self.probe = probe;
    }
}
