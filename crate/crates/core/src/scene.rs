//! Geometric and radiometric description of an indoor environment.
//!
//! A [`ScenarioConfig`] is the serializable input (TOML on disk); a [`Scene`]
//! is the immutable, meshed form that the channel tracer consumes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::radiometry::{self, NoiseParams, ResponsivityTable};
use crate::{Error, Result};

mod builtin;

pub use builtin::{builtin_scenario, BUILTIN_NAMES};

/// Axis-aligned room, one corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    /// Extent along x, m.
    pub length: f64,
    /// Extent along y, m.
    pub width: f64,
    /// Extent along z, m.
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceOptics {
    pub walls: f64,
    pub ceiling: f64,
    pub floor: f64,
    /// Lambertian order of every diffuse surface.
    #[serde(default = "one")]
    pub lambertian_order: f64,
}

fn one() -> f64 {
    1.0
}

/// A reflecting rectangle `origin + s·edge_u + t·edge_v`, `s, t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub name: String,
    pub origin: Vec3,
    pub edge_u: Vec3,
    pub edge_v: Vec3,
    /// Unit normal pointing into the room.
    pub normal: Vec3,
    pub reflection_coefficient: f64,
    pub lambertian_order: f64,
}

impl Surface {
    pub fn area(&self) -> f64 {
        self.edge_u.cross(self.edge_v).norm()
    }
}

/// A small patch of a surface acting as a secondary Lambertian emitter.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub centre: Vec3,
    pub area: f64,
    pub normal: Vec3,
    pub reflection_coefficient: f64,
    pub lambertian_order: f64,
    /// Index of the parent surface.
    pub surface: usize,
}

/// A ceiling access point: one co-located point source standing in for
/// all of its RYGB laser diodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterUnit {
    pub position: Vec3,
    #[serde(default = "down")]
    pub orientation: Vec3,
    /// Half-power semi-angle, degrees.
    pub semi_angle: f64,
    /// Number of laser diodes of each colour in the unit.
    pub ld_count: u32,
    /// Optical power of one laser diode per wavelength, W.
    pub ld_power: BTreeMap<String, f64>,
}

fn down() -> Vec3 {
    Vec3::DOWN
}

impl TransmitterUnit {
    pub fn lambertian_order(&self) -> Result<f64> {
        radiometry::lambertian_order(self.semi_angle)
    }

    /// Total unit power on one wavelength, W.
    pub fn power(&self, wavelength: &str) -> Option<f64> {
        self.ld_power.get(wavelength).map(|p| p * self.ld_count as f64)
    }
}

/// One photodetector of an angle diversity receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverBranch {
    /// Degrees from +x towards +y.
    pub azimuth: f64,
    /// Degrees above the horizontal plane.
    pub elevation: f64,
    /// Field-of-view half angle, degrees.
    pub fov: f64,
    /// Detector area, m².
    pub area: f64,
}

impl ReceiverBranch {
    pub fn boresight(&self) -> Vec3 {
        Vec3::from_az_el(self.azimuth, self.elevation)
    }

    pub fn cos_fov(&self) -> f64 {
        radiometry::cos_deg(self.fov)
    }
}

/// A user device. Branch order is the branch index used by assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverStation {
    pub user: String,
    pub position: Vec3,
    /// Falls back to [`ScenarioConfig::default_branches`] when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<ReceiverBranch>,
}

/// An opaque, non-reflecting obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Blocker {
    /// Axis-aligned solid box.
    Box { min: Vec3, max: Vec3 },
    /// Horizontal rectangle at height `z`.
    Plane { z: f64, min: [f64; 2], max: [f64; 2] },
}

impl Blocker {
    /// True iff the open segment `a → b` passes through the open interior of
    /// the box, or crosses the open plane rectangle strictly between its
    /// end points. Touching or sliding along a boundary does not block.
    pub fn intersects(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        match *self {
            Blocker::Box { min, max } => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for (o, dir, mn, mx) in [
                    (a.x, d.x, min.x, max.x),
                    (a.y, d.y, min.y, max.y),
                    (a.z, d.z, min.z, max.z),
                ] {
                    if dir == 0.0 {
                        if !(o > mn && o < mx) {
                            return false;
                        }
                    } else {
                        let (t0, t1) = ((mn - o) / dir, (mx - o) / dir);
                        let (t0, t1) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
                        lo = lo.max(t0);
                        hi = hi.min(t1);
                    }
                }
                lo < hi
            }
            Blocker::Plane { z, min, max } => {
                if d.z == 0.0 {
                    return false;
                }
                let t = (z - a.z) / d.z;
                if !(t > 0.0 && t < 1.0) {
                    return false;
                }
                let p = a + d * t;
                p.x > min[0] && p.x < max[0] && p.y > min[1] && p.y < max[1]
            }
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Blocker::Box { min, max } => {
                min.is_finite() && max.is_finite() && min.x < max.x && min.y < max.y && min.z < max.z
            }
            Blocker::Plane { z, min, max } => {
                z.is_finite()
                    && min.iter().chain(&max).all(|v| v.is_finite())
                    && min[0] < max[0]
                    && min[1] < max[1]
            }
        }
    }
}

/// True iff the segment `a → b` is blocked by any blocker.
pub fn occluded(a: Vec3, b: Vec3, blockers: &[Blocker]) -> bool {
    blockers.iter().any(|bl| bl.intersects(a, b))
}

/// Full parameterization of one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub room: Room,
    pub reflectance: SurfaceOptics,
    /// Reflection-element area for first and second order paths, m².
    pub element_areas: [f64; 2],
    /// Ordered wavelength set; the order is the wavelength index.
    pub wavelengths: Vec<String>,
    pub responsivity: ResponsivityTable,
    pub noise: NoiseParams,
    /// Minimum acceptable SINR, dB.
    pub sinr_threshold_db: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub default_branches: Vec<ReceiverBranch>,
    pub transmitters: Vec<TransmitterUnit>,
    pub stations: Vec<ReceiverStation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blockers: Vec<Blocker>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.resolve_branches();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::ConfigParse(inner) => Error::Format {
                path: path.to_owned(),
                message: inner.to_string(),
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// Stable text used for content hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario config serializes")
    }

    fn resolve_branches(&mut self) {
        for st in &mut self.stations {
            if st.branches.is_empty() {
                st.branches = self.default_branches.clone();
            }
        }
    }

    pub fn sinr_threshold_linear(&self) -> f64 {
        10f64.powf(self.sinr_threshold_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let Room {
            length,
            width,
            height,
        } = self.room;
        if ![length, width, height].iter().all(|v| v.is_finite() && *v > 0.0) {
            return bad(format!("room dimensions must be positive: {:?}", self.room));
        }
        let o = &self.reflectance;
        for (what, rho) in [("walls", o.walls), ("ceiling", o.ceiling), ("floor", o.floor)] {
            if !(0.0..=1.0).contains(&rho) {
                return bad(format!("{what} reflection coefficient {rho} outside [0, 1]"));
            }
        }
        if !(o.lambertian_order > 0.0) {
            return bad("surface lambertian order must be positive".into());
        }
        if !self.element_areas.iter().all(|a| a.is_finite() && *a > 0.0) {
            return bad(format!(
                "element areas must be positive: {:?}",
                self.element_areas
            ));
        }
        if self.wavelengths.is_empty() {
            return bad("at least one wavelength is required".into());
        }
        self.responsivity.validate()?;
        self.noise.validate()?;
        for w in &self.wavelengths {
            if self.responsivity.get(w).is_none() {
                return bad(format!("wavelength `{w}` has no responsivity"));
            }
        }
        if self.transmitters.is_empty() {
            return bad("at least one transmitter is required".into());
        }
        for (i, tx) in self.transmitters.iter().enumerate() {
            if !tx.position.is_finite() || tx.orientation.normalized().is_none() {
                return bad(format!("transmitter {} has invalid position/orientation", i + 1));
            }
            tx.lambertian_order()
                .map_err(|e| Error::InvalidConfig(format!("transmitter {}: {e}", i + 1)))?;
            for w in &self.wavelengths {
                match tx.power(w) {
                    Some(p) if p >= 0.0 && p.is_finite() => {}
                    Some(p) => return bad(format!("transmitter {} power on `{w}` is {p}", i + 1)),
                    None => return bad(format!("transmitter {} has no power on `{w}`", i + 1)),
                }
            }
        }
        for st in &self.stations {
            if !st.position.is_finite() {
                return bad(format!("station `{}` has a non-finite position", st.user));
            }
            if st.branches.is_empty() {
                return bad(format!("station `{}` has no receiver branches", st.user));
            }
            for br in &st.branches {
                if !(br.fov > 0.0 && br.fov <= 90.0) || !(br.area > 0.0) {
                    return bad(format!("station `{}` has an invalid branch {br:?}", st.user));
                }
            }
        }
        let nb = self.stations.first().map_or(0, |s| s.branches.len());
        if self.stations.iter().any(|s| s.branches.len() != nb) {
            return bad("all stations must have the same number of branches".into());
        }
        if !self.blockers.iter().all(Blocker::is_finite) {
            return bad("blockers must have finite, non-empty extent".into());
        }
        let capacity = self.transmitters.len() * self.wavelengths.len();
        if capacity < self.stations.len() {
            return bad(format!(
                "{} access-point/wavelength pairs cannot serve {} users",
                capacity,
                self.stations.len()
            ));
        }
        if !self.sinr_threshold_db.is_finite() {
            return bad("SINR threshold must be finite".into());
        }
        Ok(())
    }

    /// The six room boundaries, floor first.
    pub fn surfaces(&self) -> Vec<Surface> {
        let Room {
            length: l,
            width: w,
            height: h,
        } = self.room;
        let o = &self.reflectance;
        let s = |name: &str, origin: Vec3, u: Vec3, v: Vec3, normal: Vec3, rho: f64| Surface {
            name: name.to_string(),
            origin,
            edge_u: u,
            edge_v: v,
            normal,
            reflection_coefficient: rho,
            lambertian_order: o.lambertian_order,
        };
        let (ex, ey, ez) = (
            Vec3::new(l, 0.0, 0.0),
            Vec3::new(0.0, w, 0.0),
            Vec3::new(0.0, 0.0, h),
        );
        vec![
            s("floor", Vec3::ZERO, ex, ey, Vec3::UP, o.floor),
            s("ceiling", ez, ex, ey, Vec3::DOWN, o.ceiling),
            s("wall_x0", Vec3::ZERO, ey, ez, Vec3::new(1.0, 0.0, 0.0), o.walls),
            s("wall_x1", ex, ey, ez, Vec3::new(-1.0, 0.0, 0.0), o.walls),
            s("wall_y0", Vec3::ZERO, ex, ez, Vec3::new(0.0, 1.0, 0.0), o.walls),
            s("wall_y1", ey, ex, ez, Vec3::new(0.0, -1.0, 0.0), o.walls),
        ]
    }
}

/// Split `[0, len]` into cells of width `pitch`, the last one shrunk to fit.
fn cell_bounds(len: f64, pitch: f64) -> Vec<f64> {
    let full = (len / pitch + 1e-9).floor() as usize;
    let mut bounds: Vec<f64> = (0..=full).map(|i| i as f64 * pitch).collect();
    let rest = len - full as f64 * pitch;
    if rest > 1e-9 * len.max(1.0) {
        bounds.push(len);
    } else {
        *bounds.last_mut().unwrap() = len;
    }
    bounds
}

/// Tile every surface into square elements of the requested area.
///
/// Surfaces that are not a whole number of pitches long get a narrower last
/// row/column so the tiling never overhangs the surface.
pub fn mesh_surfaces(surfaces: &[Surface], element_area: f64) -> Result<Vec<Element>> {
    if !(element_area > 0.0 && element_area.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "element area must be positive, got {element_area}"
        )));
    }
    let smallest = surfaces.iter().map(Surface::area).fold(f64::INFINITY, f64::min);
    if element_area > smallest {
        return Err(Error::InvalidArgument(format!(
            "element area {element_area} m² exceeds the smallest surface ({smallest} m²)"
        )));
    }
    let pitch = element_area.sqrt();
    let mut out = Vec::new();
    for (idx, s) in surfaces.iter().enumerate() {
        let (lu, lv) = (s.edge_u.norm(), s.edge_v.norm());
        let (du, dv) = (s.edge_u * (1.0 / lu), s.edge_v * (1.0 / lv));
        let (bu, bv) = (cell_bounds(lu, pitch), cell_bounds(lv, pitch));
        for u in bu.windows(2) {
            for v in bv.windows(2) {
                let (wu, wv) = (u[1] - u[0], v[1] - v[0]);
                out.push(Element {
                    centre: s.origin + du * (0.5 * (u[0] + u[1])) + dv * (0.5 * (v[0] + v[1])),
                    area: wu * wv,
                    normal: s.normal,
                    reflection_coefficient: s.reflection_coefficient,
                    lambertian_order: s.lambertian_order,
                    surface: idx,
                });
            }
        }
    }
    Ok(out)
}

/// A validated scenario together with its reflection meshes.
///
/// Immutable once built; share it freely between threads.
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: ScenarioConfig,
    pub surfaces: Vec<Surface>,
    /// `meshes[k]` holds the elements used for reflection order `k + 1`.
    pub meshes: [Vec<Element>; 2],
}

impl Scene {
    pub fn build(config: ScenarioConfig) -> Result<Scene> {
        config.validate()?;
        let surfaces = config.surfaces();
        let meshes = [
            mesh_surfaces(&surfaces, config.element_areas[0])?,
            mesh_surfaces(&surfaces, config.element_areas[1])?,
        ];
        Ok(Scene {
            config,
            surfaces,
            meshes,
        })
    }

    /// Scene with caller-supplied reflection elements (for synthetic set-ups).
    pub fn from_parts(config: ScenarioConfig, first: Vec<Element>, second: Vec<Element>) -> Result<Scene> {
        config.validate()?;
        let surfaces = config.surfaces();
        Ok(Scene {
            config,
            surfaces,
            meshes: [first, second],
        })
    }

    pub fn users(&self) -> usize {
        self.config.stations.len()
    }

    pub fn access_points(&self) -> usize {
        self.config.transmitters.len()
    }

    pub fn wavelengths(&self) -> usize {
        self.config.wavelengths.len()
    }

    pub fn branches(&self) -> usize {
        self.config.stations.first().map_or(0, |s| s.branches.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall(lu: f64, lv: f64) -> Surface {
        Surface {
            name: "w".into(),
            origin: Vec3::ZERO,
            edge_u: Vec3::new(lu, 0.0, 0.0),
            edge_v: Vec3::new(0.0, 0.0, lv),
            normal: Vec3::new(0.0, 1.0, 0.0),
            reflection_coefficient: 0.8,
            lambertian_order: 1.0,
        }
    }

    #[test]
    fn exact_tiling_counts() {
        let e = mesh_surfaces(&[wall(4.0, 4.0)], 0.04).unwrap();
        assert_eq!(e.len(), 400);
        assert!(e.iter().all(|el| (el.area - 0.04).abs() < 1e-9));
        let e = mesh_surfaces(&[wall(4.0, 4.0)], 0.0025).unwrap();
        assert_eq!(e.len(), 6400);
    }

    #[test]
    fn remainder_column_is_shrunk() {
        let b = cell_bounds(3.63, 0.2);
        assert_eq!(b.len(), 18 + 2);
        let widths: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths[..18].iter().all(|w| (w - 0.2).abs() < 1e-12));
        assert!((widths[18] - 0.03).abs() < 1e-12);

        let e = mesh_surfaces(&[wall(3.63, 2.0)], 0.04).unwrap();
        assert_eq!(e.len(), 19 * 10);
        let sum: f64 = e.iter().map(|el| el.area).sum();
        assert!((sum - 3.63 * 2.0).abs() / 7.26 < 1e-9);
    }

    #[test]
    fn element_centres_on_surface() {
        let s = wall(3.63, 2.2);
        for el in mesh_surfaces(std::slice::from_ref(&s), 0.0025).unwrap() {
            assert_eq!(el.centre.y, 0.0);
            assert!(el.centre.x > 0.0 && el.centre.x < 3.63);
            assert!(el.centre.z > 0.0 && el.centre.z < 2.2);
        }
    }

    #[test]
    fn mesh_rejects_bad_area() {
        assert!(mesh_surfaces(&[wall(1.0, 1.0)], 0.0).is_err());
        assert!(mesh_surfaces(&[wall(1.0, 1.0)], -1.0).is_err());
        assert!(mesh_surfaces(&[wall(1.0, 1.0)], 2.0).is_err());
    }

    #[test]
    fn occlusion_rules() {
        let a = Vec3::new(0.5, 0.5, 2.0);
        let b = Vec3::new(0.5, 0.5, 0.0);
        assert!(!occluded(a, b, &[]));

        let seat = Blocker::Plane {
            z: 0.45,
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        };
        assert!(occluded(a, b, &[seat]));
        // grazing along the plane
        assert!(!occluded(
            Vec3::new(-1.0, 0.5, 0.45),
            Vec3::new(2.0, 0.5, 0.45),
            &[seat]
        ));
        // ending exactly on the plane
        assert!(!occluded(a, Vec3::new(0.5, 0.5, 0.45), &[seat]));
        // crossing exactly on the rectangle edge
        assert!(!occluded(
            Vec3::new(1.0, 0.5, 1.0),
            Vec3::new(1.0, 0.5, 0.0),
            &[seat]
        ));

        let rack = Blocker::Box {
            min: Vec3::new(1.0, 1.0, 0.0),
            max: Vec3::new(2.0, 2.0, 2.0),
        };
        assert!(occluded(
            Vec3::new(0.0, 1.5, 1.0),
            Vec3::new(3.0, 1.5, 1.0),
            &[rack]
        ));
        // sliding along a face
        assert!(!occluded(
            Vec3::new(0.0, 1.0, 1.0),
            Vec3::new(3.0, 1.0, 1.0),
            &[rack]
        ));
        // touching the top face from above
        assert!(!occluded(
            Vec3::new(1.5, 1.5, 3.0),
            Vec3::new(1.5, 1.5, 2.0),
            &[rack]
        ));
        // leaving the top face downwards enters the interior
        assert!(occluded(
            Vec3::new(1.5, 1.5, 2.0),
            Vec3::new(1.5, 1.5, 0.0),
            &[rack]
        ));
    }

    #[test]
    fn surfaces_partition_room_boundary() {
        let cfg = builtin_scenario("office").unwrap();
        let surfaces = cfg.surfaces();
        let total: f64 = surfaces.iter().map(Surface::area).sum();
        assert!((total - (2.0 * 16.0 + 4.0 * 12.0)).abs() < 1e-12);
        for s in &surfaces {
            // normals point inwards: the room centre is on the positive side
            let c = Vec3::new(2.0, 2.0, 1.5);
            assert!((c - s.origin).dot(s.normal) > 0.0, "{}", s.name);
        }
    }

    #[test]
    fn config_toml_round_trip_preserves_branch_order() {
        for name in BUILTIN_NAMES {
            let cfg = builtin_scenario(name).unwrap();
            let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            assert_eq!(back, cfg);
            for (a, b) in cfg.stations.iter().zip(&back.stations) {
                assert_eq!(a.branches, b.branches);
            }
        }
    }

    #[test]
    fn validation_catches_capacity_and_missing_power() {
        let mut cfg = builtin_scenario("office").unwrap();
        cfg.wavelengths.truncate(1);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(m)) if m.contains("cannot serve")));

        let mut cfg = builtin_scenario("office").unwrap();
        cfg.transmitters[0].ld_power.remove("blue");
        assert!(cfg.validate().is_err());

        let mut cfg = builtin_scenario("office").unwrap();
        cfg.responsivity.0.remove("green");
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_parse_error_is_reported() {
        let err = ScenarioConfig::from_toml_str("name = 3").unwrap_err();
        assert!(matches!(err, Error::ConfigParse(_)));
    }
}
