//! Contact regions of two photographed objects.
//!
//! A *couple* is a pair of single points, one from each object, that are in
//! contact (closer than `eps_contact`) at some instant. The loci of couples
//! give the regions:
//!
//! * `D_R(t)` is where couples meet at `t`; `⁰D_R(t)` keeps the loci on the
//!   sphere `|OP| = −c t`, the only ones whose meeting can be photographed;
//! * `D_I` collects `D_R(t)` over the photographic interval `I_F`;
//! * `D_P` is the intersection of every `D_R(t)` on `I_F` when none is empty,
//!   `D_SP` the intersection of the non-empty ones;
//! * `D_G` is the set of starting points of light reaching the pinhole at
//!   `t = 0`, each tagged as a couple image or a single image.
//!
//! [`RegionAnalysis::compute`] evaluates all of them at once and
//! [`verify_assertions`] checks the set relations they must satisfy.

mod assertions;
mod contacts;
mod point_set;
mod report;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{retarded_emission, Event, ParticleRef, SpatialPoint};
use crate::numeric::uniform_grid;
use crate::optics::Provenance;
use crate::scenes::{Scene, Tolerances};

pub use assertions::{
    verify_analysis, verify_assertions, AssertionId, AssertionReport, AssertionResult, Status,
    Witness, RAIL_RESIDUAL_TOL,
};
pub use contacts::{contact_grid, find_contacts, ContactEvent};
pub use point_set::{RegionPoint, RegionRole, RegionSet};
pub use report::{region_report_json, report_json};

/// `I_F = [t_L, t_U]`: the range of retarded emission times of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotographicInterval {
    pub t_l: f64,
    pub t_u: f64,
}

impl PhotographicInterval {
    pub fn from_times(times: &[f64]) -> Option<Self> {
        let mut it = times.iter().copied();
        let first = it.next()?;
        let (t_l, t_u) = it.fold((first, first), |(lo, hi), t| (lo.min(t), hi.max(t)));
        Some(Self { t_l, t_u })
    }

    pub fn contains(&self, t: f64, eps: f64) -> bool {
        t >= self.t_l - eps && t <= self.t_u + eps
    }

    pub fn length(&self) -> f64 {
        self.t_u - self.t_l
    }
}

/// The spherical shell `−c t_U ≤ |OP| ≤ −c t_L` holding every photographed
/// contact locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicShell {
    pub r_inner: f64,
    pub r_outer: f64,
}

impl IsotropicShell {
    pub fn new(interval: PhotographicInterval, c: f64) -> Self {
        Self {
            r_inner: -c * interval.t_u,
            r_outer: -c * interval.t_l,
        }
    }

    /// How far `p` lies outside the shell (0 inside).
    pub fn excess(&self, p: SpatialPoint) -> f64 {
        let r = p.norm();
        (self.r_inner - r).max(r - self.r_outer).max(0.0)
    }

    pub fn contains(&self, p: SpatialPoint, eps: f64) -> bool {
        self.excess(p) <= eps
    }
}

/// Retarded emission event of every particle, in scene order.
pub fn retarded_emissions(scene: &Scene) -> Vec<(ParticleRef, Result<Event>)> {
    let c = scene.c();
    let tol = scene.tolerances().tol_root;
    let particles: Vec<_> = scene.particles().collect();
    particles
        .par_iter()
        .map(|w| (w.particle(), retarded_emission(w, c, tol)))
        .collect()
}

fn all_emissions(scene: &Scene) -> Result<Vec<(ParticleRef, Event)>> {
    retarded_emissions(scene)
        .into_iter()
        .map(|(p, e)| e.map(|e| (p, e)))
        .collect()
}

/// `I_F` of a scene; fails if some particle has no emission in its window.
pub fn photographic_interval(scene: &Scene) -> Result<PhotographicInterval> {
    let times: Vec<f64> = all_emissions(scene)?.iter().map(|(_, e)| e.t).collect();
    Ok(PhotographicInterval::from_times(&times).expect("scenes have particles"))
}

pub fn isotropic_shell(scene: &Scene) -> Result<IsotropicShell> {
    Ok(IsotropicShell::new(photographic_interval(scene)?, scene.c()))
}

/// Index range of events (sorted by time) within `eps` of `t`.
fn time_window(sorted: &[ContactEvent], t: f64, eps: f64) -> std::ops::Range<usize> {
    let lo = sorted.partition_point(|e| e.t < t - eps);
    let hi = sorted.partition_point(|e| e.t <= t + eps);
    lo..hi.max(lo)
}

fn locus_point(e: &ContactEvent) -> RegionPoint {
    RegionPoint {
        point: e.locus,
        times: vec![e.t],
        provenance: None,
        sources: vec![e.first, e.second],
    }
}

/// `D_R(t)` from time-sorted contact events.
pub fn region_at(sorted: &[ContactEvent], t: f64, tol: &Tolerances) -> RegionSet {
    let items = sorted[time_window(sorted, t, tol.eps_time)]
        .iter()
        .map(locus_point)
        .collect();
    RegionSet::from_points(RegionRole::Retarded { t }, items, tol.eps_set)
}

/// `⁰D_R(t)` from `D_R(t)`.
pub fn zero_region_at(d_r: &RegionSet, c: f64) -> Result<RegionSet> {
    let RegionRole::Retarded { t } = d_r.role() else {
        return Err(Error::RoleMismatch {
            expected: "D_R(t)".into(),
            found: d_r.role().to_string(),
        });
    };
    let kept = d_r
        .iter()
        .filter(|m| (m.point.norm() + c * t).abs() <= d_r.eps())
        .cloned()
        .collect();
    Ok(RegionSet::from_points(RegionRole::ZeroRetarded { t }, kept, d_r.eps()))
}

/// `D_I` and its multi-meeting points: loci met at instants more than
/// `eps_time` apart.
pub fn integrated_region(in_interval: &[ContactEvent], tol: &Tolerances) -> (RegionSet, RegionSet) {
    let d_i = RegionSet::from_points(
        RegionRole::Integrated,
        in_interval.iter().map(locus_point).collect(),
        tol.eps_set,
    );
    let multi = d_i
        .iter()
        .filter(|m| match (m.times.first(), m.times.last()) {
            (Some(a), Some(b)) => b - a > tol.eps_time,
            _ => false,
        })
        .cloned()
        .collect();
    let multi = RegionSet::from_points(RegionRole::MultiMeeting, multi, tol.eps_set);
    (d_i, multi)
}

/// `D_P`, `D_SP` and the slice statistics they were built from.
#[derive(Debug, Clone)]
pub struct PermanentRegions {
    pub d_p: RegionSet,
    pub d_sp: RegionSet,
    pub slices: usize,
    pub empty_slices: usize,
}

/// Intersects `D_R(t)` over a uniform grid of `I_F` joined with the contact
/// times inside it, so isolated meetings are never stepped over.
pub fn permanent_regions(
    sorted: &[ContactEvent],
    interval: PhotographicInterval,
    grid_n: usize,
    tol: &Tolerances,
) -> PermanentRegions {
    let mut times = uniform_grid(interval.t_l, interval.t_u, grid_n);
    times.extend(sorted.iter().map(|c| c.t).filter(|&t| interval.contains(t, 0.0)));
    times.sort_by(f64::total_cmp);
    times.dedup_by(|next, kept| *next - *kept <= 0.25 * tol.eps_time);
    let slices: Vec<RegionSet> = times.par_iter().map(|&t| region_at(sorted, t, tol)).collect();
    let empty_slices = slices.iter().filter(|s| s.is_empty()).count();
    let mut nonempty = slices.iter().filter(|s| !s.is_empty());
    let d_sp = match nonempty.next() {
        None => RegionSet::empty(RegionRole::SemiPermanent, tol.eps_set),
        Some(first) => {
            let mut acc = first.clone();
            for s in nonempty {
                if acc.is_empty() {
                    break;
                }
                acc = acc.intersection(s);
            }
            acc.with_role(RegionRole::SemiPermanent)
        }
    };
    let d_p = if empty_slices == 0 {
        d_sp.clone().with_role(RegionRole::Permanent)
    } else {
        RegionSet::empty(RegionRole::Permanent, tol.eps_set)
    };
    PermanentRegions {
        d_p,
        d_sp,
        slices: slices.len(),
        empty_slices,
    }
}

/// One particle's photographed starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub particle: ParticleRef,
    pub event: Event,
    pub provenance: Provenance,
}

/// Tags each emission: a couple image when a contact event coincides with
/// it in time and place.
fn classify_emissions(
    emissions: &[(ParticleRef, Event)],
    sorted: &[ContactEvent],
    tol: &Tolerances,
) -> Vec<Emission> {
    emissions
        .iter()
        .map(|&(particle, event)| {
            let couple = sorted[time_window(sorted, event.t, tol.eps_time)]
                .iter()
                .any(|c| c.locus.distance(event.pos) <= tol.eps_set);
            Emission {
                particle,
                event,
                provenance: if couple { Provenance::CoupleImage } else { Provenance::SingleImage },
            }
        })
        .collect()
}

fn photographed_set(emissions: &[Emission], eps: f64) -> RegionSet {
    let items = emissions
        .iter()
        .map(|e| RegionPoint {
            point: e.event.pos,
            times: vec![e.event.t],
            provenance: Some(e.provenance),
            sources: vec![e.particle],
        })
        .collect();
    RegionSet::from_points(RegionRole::Photographed, items, eps)
}

/// Every region of a scene, computed from one contact scan.
#[derive(Debug, Clone)]
pub struct RegionAnalysis {
    pub tolerances: Tolerances,
    pub c: f64,
    pub interval: PhotographicInterval,
    pub shell: IsotropicShell,
    pub emissions: Vec<Emission>,
    /// All contact events over the scene window, time-sorted.
    pub contacts: Vec<ContactEvent>,
    /// The events within `I_F`, time-sorted.
    pub contacts_in_interval: Vec<ContactEvent>,
    pub d_i: RegionSet,
    pub multi_meeting: RegionSet,
    pub permanent: PermanentRegions,
    /// Non-empty `⁰D_R(t)`, one per distinct photographed meeting time.
    pub zero_slices: Vec<RegionSet>,
    /// `⋃ₜ ⁰D_R(t)`, from the individual events.
    pub zero_union: RegionSet,
    pub d_g: RegionSet,
}

impl RegionAnalysis {
    pub fn compute(scene: &Scene) -> Result<Self> {
        let tol = *scene.tolerances();
        let c = scene.c();
        let raw = all_emissions(scene)?;
        let times: Vec<f64> = raw.iter().map(|(_, e)| e.t).collect();
        let interval = PhotographicInterval::from_times(&times).expect("scenes have particles");
        let grid = contact_grid(scene, Some(interval), &times);
        let contacts = contacts::contacts_on_grid(scene, &grid);
        let contacts_in_interval: Vec<ContactEvent> = contacts
            .iter()
            .filter(|e| interval.contains(e.t, tol.eps_time))
            .copied()
            .collect();
        log::debug!(
            "{} contact events, {} within I_F = [{}, {}]",
            contacts.len(),
            contacts_in_interval.len(),
            interval.t_l,
            interval.t_u
        );

        let (d_i, multi_meeting) = integrated_region(&contacts_in_interval, &tol);
        let permanent = permanent_regions(&contacts_in_interval, interval, scene.time_grid_n(), &tol);

        let on_cone = |e: &ContactEvent| (e.locus.norm() + c * e.t).abs() <= tol.eps_set;
        let zero_union = RegionSet::from_points(
            RegionRole::ZeroUnion,
            contacts_in_interval.iter().filter(|e| on_cone(e)).map(locus_point).collect(),
            tol.eps_set,
        );
        let zero_slices = zero_slices(&contacts_in_interval, c, &tol)?;

        let emissions = classify_emissions(&raw, &contacts, &tol);
        let d_g = photographed_set(&emissions, tol.eps_set);

        Ok(Self {
            tolerances: tol,
            c,
            interval,
            shell: IsotropicShell::new(interval, c),
            emissions,
            contacts,
            contacts_in_interval,
            d_i,
            multi_meeting,
            permanent,
            zero_slices,
            zero_union,
            d_g,
        })
    }

    /// `D_R(t)` for `t ∈ I_F`.
    pub fn region_at(&self, t: f64) -> Result<RegionSet> {
        if !self.interval.contains(t, self.tolerances.eps_time) {
            return Err(Error::TimeOutsideInterval {
                t,
                t_l: self.interval.t_l,
                t_u: self.interval.t_u,
            });
        }
        Ok(region_at(&self.contacts_in_interval, t, &self.tolerances))
    }

    pub fn zero_region_at(&self, t: f64) -> Result<RegionSet> {
        zero_region_at(&self.region_at(t)?, self.c)
    }

    /// Members of `D_G ∩ D_I` outside `⋃ₜ ⁰D_R(t)`.
    pub fn unphotographed_contacts(&self) -> Vec<&RegionPoint> {
        self.d_g
            .iter()
            .filter(|m| self.d_i.contains(m.point) && !self.zero_union.contains(m.point))
            .collect()
    }
}

/// One `⁰D_R(t)` per cluster of near-cone event times.
fn zero_slices(in_interval: &[ContactEvent], c: f64, tol: &Tolerances) -> Result<Vec<RegionSet>> {
    let reach = tol.eps_set + c * tol.eps_time;
    let mut times: Vec<f64> = in_interval
        .iter()
        .filter(|e| (e.locus.norm() + c * e.t).abs() <= reach)
        .map(|e| e.t)
        .collect();
    times.sort_by(f64::total_cmp);
    let mut starts: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for t in times {
        if t - last > tol.eps_time {
            starts.push(t);
        }
        last = t;
    }
    let mut out = Vec::new();
    for t in starts {
        let zero = zero_region_at(&region_at(in_interval, t, tol), c)?;
        if !zero.is_empty() {
            out.push(zero);
        }
    }
    Ok(out)
}
