//! Deterministic Lambertian ray tracing: line of sight plus first and
//! second order diffuse reflections.

use std::f64::consts::PI;

use log::warn;

use super::ir::ImpulseResponse;
use super::TraceParams;
use crate::geometry::Vec3;
use crate::scene::{occluded, Blocker, Element, ReceiverBranch, Scene, TransmitterUnit};
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy)]
struct Emitter {
    position: Vec3,
    normal: Vec3,
    order: f64,
}

#[derive(Debug, Clone, Copy)]
struct Receiver {
    position: Vec3,
    normal: Vec3,
    area: f64,
    /// `None` accepts the whole front hemisphere.
    cos_fov: Option<f64>,
}

impl Receiver {
    fn branch(position: Vec3, branch: &ReceiverBranch) -> Self {
        Receiver {
            position,
            normal: branch.boresight(),
            area: branch.area,
            cos_fov: Some(branch.cos_fov()),
        }
    }

    fn element(e: &Element) -> Self {
        Receiver {
            position: e.centre,
            normal: e.normal,
            area: e.area,
            cos_fov: None,
        }
    }
}

impl Emitter {
    fn element(e: &Element) -> Self {
        Emitter {
            position: e.centre,
            normal: e.normal,
            order: e.lambertian_order,
        }
    }
}

/// Fraction of the emitter's power collected by the receiver patch, with
/// the path length. `None` if the receiver is behind the emitter, faces
/// away, or the arrival falls outside its field of view.
fn transfer(src: &Emitter, dst: &Receiver) -> Option<(f64, f64)> {
    let v = dst.position - src.position;
    let d2 = v.norm_squared();
    if d2 == 0.0 {
        return None;
    }
    let d = d2.sqrt();
    let cos_emit = src.normal.dot(v) / d;
    let cos_inc = -dst.normal.dot(v) / d;
    if cos_emit <= 0.0 || cos_inc <= 0.0 {
        return None;
    }
    if let Some(c) = dst.cos_fov {
        if cos_inc < c {
            return None;
        }
    }
    let gain = (src.order + 1.0) / (2.0 * PI) * cos_emit.powf(src.order) * cos_inc * dst.area / d2;
    Some((gain, d))
}

/// Line-of-sight optical power, W, from a transmitter unit on one
/// wavelength into a receiver branch at `position`.
pub fn los_power(
    tx: &TransmitterUnit,
    wavelength: &str,
    position: Vec3,
    branch: &ReceiverBranch,
    blockers: &[Blocker],
) -> Result<f64> {
    let power = tx
        .power(wavelength)
        .ok_or_else(|| Error::InvalidArgument(format!("transmitter has no `{wavelength}` power")))?;
    if position == tx.position {
        return Err(Error::Geometry("transmitter and receiver coincide".into()));
    }
    let src = Emitter {
        position: tx.position,
        normal: tx
            .orientation
            .normalized()
            .ok_or_else(|| Error::Geometry("zero transmitter orientation".into()))?,
        order: tx.lambertian_order()?,
    };
    let rx = Receiver::branch(position, branch);
    Ok(match transfer(&src, &rx) {
        Some((g, _)) if !occluded(src.position, position, blockers) => power * g,
        _ => 0.0,
    })
}

/// Result of tracing one (access point, receiver branch) link at 1 W
/// transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTrace {
    pub ir: ImpulseResponse,
    /// Power by path order: line of sight, one bounce, two bounces.
    pub order_power: [f64; 3],
    /// Running sum of every path power, independent of the binning.
    pub direct_sum: f64,
    /// The delay window had to be extended.
    pub window_extended: bool,
}

impl LinkTrace {
    fn new(params: &TraceParams) -> Result<Self> {
        Ok(LinkTrace {
            ir: ImpulseResponse::new(params.bin_width, params.window)?,
            order_power: [0.0; 3],
            direct_sum: 0.0,
            window_extended: false,
        })
    }

    #[inline]
    fn record(&mut self, order: usize, path_length: f64, power: f64) {
        self.window_extended |= self.ir.add(path_length / SPEED_OF_LIGHT, power);
        self.order_power[order] += power;
        self.direct_sum += power;
    }
}

/// Per-element power balance of the diffuse part of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBalance {
    /// 0 for the first-order mesh, 1 for the second-order mesh.
    pub mesh: usize,
    pub element: usize,
    pub reflectance: f64,
    /// Power landing on the element from the access point, W per W.
    pub incident: f64,
    /// Sum of what the trace forwards from that incident power.
    pub reemitted: f64,
}

/// Precomputed source-side quantities shared by every link of a scene.
pub struct Tracer<'a> {
    scene: &'a Scene,
    params: TraceParams,
    sources: Vec<Emitter>,
    receivers: Vec<Receiver>,
    /// `incident[m][ap * len + e]`: (gain, distance) from access point to
    /// element `e` of mesh `m`; gain 0 when there is no path.
    incident: [Vec<(f64, f64)>; 2],
    /// Per-element factor keeping total re-emission at or below the
    /// reflected share of the incident power.
    emission_scale: [Vec<f64>; 2],
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene, params: &TraceParams) -> Result<Self> {
        params.validate()?;
        for order in 1..=params.max_order as usize {
            if scene.meshes[order - 1].is_empty() && !scene.surfaces.is_empty() {
                return Err(Error::Unmeshed(order));
            }
        }
        let cfg = &scene.config;
        let sources = cfg
            .transmitters
            .iter()
            .map(|tx| {
                Ok(Emitter {
                    position: tx.position,
                    normal: tx
                        .orientation
                        .normalized()
                        .ok_or_else(|| Error::Geometry("zero transmitter orientation".into()))?,
                    order: tx.lambertian_order()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let receivers: Vec<Receiver> = cfg
            .stations
            .iter()
            .flat_map(|st| st.branches.iter().map(move |b| Receiver::branch(st.position, b)))
            .collect();
        let mut tracer = Tracer {
            scene,
            params: params.clone(),
            sources,
            receivers,
            incident: [Vec::new(), Vec::new()],
            emission_scale: [Vec::new(), Vec::new()],
        };
        for m in 0..(params.max_order as usize).min(2) {
            tracer.incident[m] = tracer.incident_on(&scene.meshes[m]);
            tracer.emission_scale[m] = tracer.emission_scales(m);
        }
        Ok(tracer)
    }

    pub fn params(&self) -> &TraceParams {
        &self.params
    }

    fn blockers(&self) -> &[Blocker] {
        &self.scene.config.blockers
    }

    fn incident_on(&self, mesh: &[Element]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.sources.len() * mesh.len());
        for src in &self.sources {
            out.extend(mesh.iter().map(|e| {
                if e.reflection_coefficient == 0.0 {
                    return (0.0, 0.0);
                }
                match transfer(src, &Receiver::element(e)) {
                    Some(gd) if !occluded(src.position, e.centre, self.blockers()) => gd,
                    _ => (0.0, 0.0),
                }
            }));
        }
        out
    }

    /// Unoccluded, unrestricted-FOV transfer sums bound what the trace can
    /// forward from each element; scale those sums down to at most one.
    fn emission_scales(&self, m: usize) -> Vec<f64> {
        use rayon::prelude::*;
        let mesh = &self.scene.meshes[m];
        mesh.par_iter()
            .enumerate()
            .map(|(i, e)| {
                let src = Emitter::element(e);
                let mut total = 0.0;
                for r in &self.receivers {
                    let open = Receiver { cos_fov: None, ..*r };
                    if let Some((g, _)) = transfer(&src, &open) {
                        total += g;
                    }
                }
                if m == 1 {
                    for (j, other) in mesh.iter().enumerate() {
                        if j != i {
                            if let Some((g, _)) = transfer(&src, &Receiver::element(other)) {
                                total += g;
                            }
                        }
                    }
                }
                if total > 1.0 {
                    1.0 / total
                } else {
                    1.0
                }
            })
            .collect()
    }

    fn receiver_index(&self, station: usize, branch: usize) -> Result<usize> {
        let st = self
            .scene
            .config
            .stations
            .get(station)
            .ok_or_else(|| Error::InvalidArgument(format!("no station {station}")))?;
        if branch >= st.branches.len() {
            return Err(Error::InvalidArgument(format!(
                "station {station} has no branch {branch}"
            )));
        }
        Ok(self.scene.config.stations[..station]
            .iter()
            .map(|s| s.branches.len())
            .sum::<usize>()
            + branch)
    }

    /// Trace every access point into one receiver branch at 1 W each.
    ///
    /// Work inside one receiver runs in a fixed order, so results do not
    /// depend on how receivers are spread over threads.
    pub fn trace_receiver(&self, station: usize, branch: usize) -> Result<Vec<LinkTrace>> {
        let rx = self.receivers[self.receiver_index(station, branch)?];
        let blockers = self.blockers();
        let n_ap = self.sources.len();
        let mut links = (0..n_ap)
            .map(|_| LinkTrace::new(&self.params))
            .collect::<Result<Vec<_>>>()?;

        for (a, src) in self.sources.iter().enumerate() {
            if src.position == rx.position {
                return Err(Error::Geometry(format!(
                    "access point {} coincides with station {station}",
                    a + 1
                )));
            }
            if let Some((g, d)) = transfer(src, &rx) {
                if !occluded(src.position, rx.position, blockers) {
                    links[a].record(0, d, g);
                }
            }
        }

        if self.params.max_order >= 1 {
            let mesh = &self.scene.meshes[0];
            let n = mesh.len();
            for (i, e) in mesh.iter().enumerate() {
                if e.reflection_coefficient == 0.0 {
                    continue;
                }
                let Some((g_out, d_out)) = transfer(&Emitter::element(e), &rx) else {
                    continue;
                };
                if occluded(e.centre, rx.position, blockers) {
                    continue;
                }
                let k = e.reflection_coefficient * self.emission_scale[0][i] * g_out;
                for (a, link) in links.iter_mut().enumerate() {
                    let (g_in, d_in) = self.incident[0][a * n + i];
                    if g_in > 0.0 {
                        link.record(1, d_in + d_out, g_in * k);
                    }
                }
            }
        }

        if self.params.max_order >= 2 {
            let mesh = &self.scene.meshes[1];
            let n = mesh.len();
            let visible: Vec<(usize, f64, f64)> = mesh
                .iter()
                .enumerate()
                .filter(|(_, e)| e.reflection_coefficient > 0.0)
                .filter_map(|(j, e)| {
                    let (g, d) = transfer(&Emitter::element(e), &rx)?;
                    (!occluded(e.centre, rx.position, blockers))
                        .then(|| (j, e.reflection_coefficient * self.emission_scale[1][j] * g, d))
                })
                .collect();
            for (j, k2, d2) in visible {
                let last = Receiver::element(&mesh[j]);
                for (i, e1) in mesh.iter().enumerate() {
                    if i == j || e1.reflection_coefficient == 0.0 {
                        continue;
                    }
                    let Some((g12, d12)) = transfer(&Emitter::element(e1), &last) else {
                        continue;
                    };
                    if occluded(e1.centre, last.position, blockers) {
                        continue;
                    }
                    let k = e1.reflection_coefficient * self.emission_scale[1][i] * g12 * k2;
                    for (a, link) in links.iter_mut().enumerate() {
                        let (g_in, d_in) = self.incident[1][a * n + i];
                        if g_in > 0.0 {
                            link.record(2, d_in + d12 + d2, g_in * k);
                        }
                    }
                }
            }
        }

        for (a, link) in links.iter().enumerate() {
            if link.window_extended {
                warn!(
                    "delay window of {:.3e} s extended to {:.3e} s for AP {} -> station {station} branch {branch}",
                    self.params.window,
                    link.ir.bins.len() as f64 * self.params.bin_width,
                    a + 1
                );
            }
        }
        Ok(links)
    }

    /// Diffuse power balance of every element lit by access point `ap`.
    pub fn energy_audit(&self, ap: usize) -> Vec<ElementBalance> {
        let blockers = self.blockers();
        let mut out = Vec::new();
        for m in 0..(self.params.max_order as usize).min(2) {
            let mesh = &self.scene.meshes[m];
            let n = mesh.len();
            for (i, e) in mesh.iter().enumerate() {
                let (g_in, _) = self.incident[m][ap * n + i];
                if g_in == 0.0 {
                    continue;
                }
                let src = Emitter::element(e);
                let mut forwarded = 0.0;
                for rx in &self.receivers {
                    if let Some((g, _)) = transfer(&src, rx) {
                        if !occluded(e.centre, rx.position, blockers) {
                            forwarded += g;
                        }
                    }
                }
                if m == 1 && self.params.max_order >= 2 {
                    for (j, other) in mesh.iter().enumerate() {
                        if j == i || other.reflection_coefficient == 0.0 {
                            continue;
                        }
                        if let Some((g, _)) = transfer(&src, &Receiver::element(other)) {
                            if !occluded(e.centre, other.centre, blockers) {
                                forwarded += g;
                            }
                        }
                    }
                }
                out.push(ElementBalance {
                    mesh: m,
                    element: i,
                    reflectance: e.reflection_coefficient,
                    incident: g_in,
                    reemitted: g_in * e.reflection_coefficient * self.emission_scale[m][i] * forwarded,
                });
            }
        }
        out
    }
}

/// Impulse response of one (access point, station, branch, wavelength)
/// tuple, scaled to the access point's power on that wavelength.
pub fn trace_impulse_response(
    scene: &Scene,
    ap: usize,
    station: usize,
    branch: usize,
    wavelength: &str,
    params: &TraceParams,
) -> Result<ImpulseResponse> {
    let tx = scene
        .config
        .transmitters
        .get(ap)
        .ok_or_else(|| Error::InvalidArgument(format!("no access point {ap}")))?;
    let power = tx
        .power(wavelength)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown wavelength `{wavelength}`")))?;
    let tracer = Tracer::new(scene, params)?;
    let mut links = tracer.trace_receiver(station, branch)?;
    Ok(links.swap_remove(ap).ir.scaled(power))
}
