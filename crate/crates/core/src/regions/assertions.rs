//! Executable checks of the set relations between the contact regions.

use std::fmt;

use crate::error::Result;
use crate::kinematics::{ParticleRef, SpatialPoint};
use crate::optics::{project, Provenance};
use crate::render::rail_residuals;
use crate::scenes::Scene;

use super::{RegionAnalysis, RegionSet};

/// Largest distance from the rail admitted for a rail-bound particle.
pub const RAIL_RESIDUAL_TOL: f64 = 1e-9;

/// Film points of the two members of a couple must agree to this.
const COUPLE_FILM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AssertionId {
    /// `⁰D_R(t)` lies on `|OP| = −c t` and consecutive slices are spaced by `c Δt`.
    ZeroSpheres,
    /// A multi-meeting point is photographed meeting at most once.
    MultiMeeting,
    /// A permanent point is photographed with exactly one couple, inside the shell.
    PermanentCouple,
    /// `⋃ₜ ⁰D_R(t) ⊆ D_G ∩ D_I`.
    ZeroInPhotographed,
    /// `D_P ⊆ D_G ∩ D_I`.
    PermanentInPhotographed,
    /// With `D_P = ∅`, some semi-permanent point may be missed by the film.
    SemiPermanentMissed,
    /// `D_G` splits into couple images (exactly `⋃ₜ ⁰D_R(t)`) and single images.
    Provenance,
    /// Rail-bound particles stay on the rail.
    Rail,
}

impl AssertionId {
    pub const ALL: [AssertionId; 8] = [
        AssertionId::ZeroSpheres,
        AssertionId::MultiMeeting,
        AssertionId::PermanentCouple,
        AssertionId::ZeroInPhotographed,
        AssertionId::PermanentInPhotographed,
        AssertionId::SemiPermanentMissed,
        AssertionId::Provenance,
        AssertionId::Rail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssertionId::ZeroSpheres => "1",
            AssertionId::MultiMeeting => "2",
            AssertionId::PermanentCouple => "3",
            AssertionId::ZeroInPhotographed => "4a",
            AssertionId::PermanentInPhotographed => "4b",
            AssertionId::SemiPermanentMissed => "4c",
            AssertionId::Provenance => "5",
            AssertionId::Rail => "rail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl fmt::Display for AssertionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The hypothesis of the relation does not hold in the scene.
    Vacuous,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Option<SpatialPoint>,
    pub t: Option<f64>,
    pub particle: Option<ParticleRef>,
    pub note: String,
}

impl Witness {
    fn at(point: SpatialPoint, note: impl Into<String>) -> Self {
        Self {
            point: Some(point),
            t: None,
            particle: None,
            note: note.into(),
        }
    }

    fn when(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionResult {
    pub id: AssertionId,
    pub status: Status,
    pub max_violation: f64,
    pub witnesses: Vec<Witness>,
}

impl AssertionResult {
    fn vacuous(id: AssertionId, note: &str) -> Self {
        Self {
            id,
            status: Status::Vacuous,
            max_violation: 0.0,
            witnesses: vec![Witness {
                point: None,
                t: None,
                particle: None,
                note: note.into(),
            }],
        }
    }

    fn judged(id: AssertionId, ok: bool, max_violation: f64, witnesses: Vec<Witness>) -> Self {
        Self {
            id,
            status: if ok { Status::Pass } else { Status::Fail },
            max_violation,
            witnesses,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionReport {
    pub results: Vec<AssertionResult>,
}

impl AssertionReport {
    pub fn get(&self, id: AssertionId) -> Option<&AssertionResult> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssertionResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }
}

pub fn verify_assertions(scene: &Scene) -> Result<AssertionReport> {
    let analysis = RegionAnalysis::compute(scene)?;
    verify_analysis(scene, &analysis)
}

pub fn verify_analysis(scene: &Scene, a: &RegionAnalysis) -> Result<AssertionReport> {
    let mut results = vec![
        zero_spheres(a),
        multi_meeting(a),
        permanent_couple(scene, a),
        subset_check(AssertionId::ZeroInPhotographed, &a.zero_union, a),
        subset_check(AssertionId::PermanentInPhotographed, &a.permanent.d_p, a),
        semi_permanent_missed(a),
        provenance(scene, a),
    ];
    if let Some(r) = rail(scene)? {
        results.push(r);
    }
    Ok(AssertionReport { results })
}

fn zero_spheres(a: &RegionAnalysis) -> AssertionResult {
    let id = AssertionId::ZeroSpheres;
    if a.zero_slices.is_empty() {
        return AssertionResult::vacuous(id, "no photographed meeting");
    }
    let eps = a.tolerances.eps_set;
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    let mut radii = Vec::new();
    for slice in &a.zero_slices {
        let super::RegionRole::ZeroRetarded { t } = slice.role() else {
            unreachable!("zero slices carry their time")
        };
        let mut sum = 0.0;
        for m in slice.iter() {
            let v = (m.point.norm() + a.c * t).abs();
            if v > eps {
                witnesses.push(Witness::at(m.point, "off the sphere |OP| = -c t").when(t));
            }
            worst = worst.max(v);
            sum += m.point.norm();
        }
        radii.push((t, sum / slice.len() as f64));
    }
    radii.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in radii.windows(2) {
        let (t1, r1) = w[0];
        let (t2, r2) = w[1];
        let v = ((r2 - r1) + a.c * (t2 - t1)).abs();
        if v > eps {
            witnesses.push(Witness {
                point: None,
                t: Some(t2),
                particle: None,
                note: format!("spacing of spheres at {t1} and {t2} differs from c dt by {v}"),
            });
        }
        worst = worst.max(v);
    }
    AssertionResult::judged(id, worst <= eps, worst, witnesses)
}

fn multi_meeting(a: &RegionAnalysis) -> AssertionResult {
    let id = AssertionId::MultiMeeting;
    if a.multi_meeting.is_empty() {
        return AssertionResult::vacuous(id, "no multi-meeting point");
    }
    let tol = &a.tolerances;
    let gap = tol.eps_time + tol.eps_set / a.c;
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    for m in a.multi_meeting.iter() {
        let p = m.point;
        let t_p = -p.norm() / a.c;
        let mut candidates: Vec<f64> = a
            .contacts_in_interval
            .iter()
            .filter(|e| (e.t - t_p).abs() <= gap && e.locus.distance(p) <= tol.eps_set)
            .map(|e| e.t)
            .collect();
        candidates.extend(
            a.emissions
                .iter()
                .filter(|e| e.event.pos.distance(p) <= tol.eps_set)
                .map(|e| e.event.t),
        );
        candidates.sort_by(f64::total_cmp);
        let mut count = 0usize;
        let mut last = f64::NEG_INFINITY;
        for t in candidates {
            if t - last > gap {
                count += 1;
            }
            last = t;
        }
        if count > 1 {
            let v = (count - 1) as f64;
            worst = worst.max(v);
            witnesses.push(Witness::at(p, format!("photographed at {count} distinct instants")));
        }
    }
    AssertionResult::judged(id, worst == 0.0, worst, witnesses)
}

fn permanent_couple(scene: &Scene, a: &RegionAnalysis) -> AssertionResult {
    let id = AssertionId::PermanentCouple;
    if a.permanent.d_p.is_empty() {
        return AssertionResult::vacuous(id, "D_P is empty");
    }
    let tol = &a.tolerances;
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    for m in a.permanent.d_p.iter() {
        let p = m.point;
        let t_p = -p.norm() / a.c;
        let mut pairs: Vec<(ParticleRef, ParticleRef)> = a
            .contacts_in_interval
            .iter()
            .filter(|e| e.locus.distance(p) <= tol.eps_set)
            .map(|e| (e.first, e.second))
            .collect();
        pairs.sort();
        pairs.dedup();
        let present = if t_p < scene.t_min() {
            0
        } else {
            pairs
                .iter()
                .filter(|(f, s)| {
                    let (Some(w1), Some(w2)) = (scene.worldline(*f), scene.worldline(*s)) else {
                        return false;
                    };
                    match (w1.position_at(t_p), w2.position_at(t_p)) {
                        (Ok(x1), Ok(x2)) => {
                            x1.distance(x2) <= tol.eps_contact && x1.midpoint(x2).distance(p) <= tol.eps_set
                        }
                        _ => false,
                    }
                })
                .count()
        };
        let excess = a.shell.excess(p);
        if present != 1 {
            witnesses.push(Witness::at(p, format!("{present} couples at the photographed instant")).when(t_p));
            worst = worst.max(1.0);
        }
        if excess > tol.eps_set {
            witnesses.push(Witness::at(p, "outside the isotropic shell"));
        }
        worst = worst.max(excess);
    }
    AssertionResult::judged(id, worst <= tol.eps_set, worst, witnesses)
}

fn subset_check(id: AssertionId, set: &RegionSet, a: &RegionAnalysis) -> AssertionResult {
    if set.is_empty() {
        return AssertionResult::vacuous(id, "the subset is empty");
    }
    let eps = a.tolerances.eps_set;
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    for m in set.iter() {
        let dg = a.d_g.nearest_distance(m.point).unwrap_or(f64::INFINITY);
        let di = a.d_i.nearest_distance(m.point).unwrap_or(f64::INFINITY);
        let v = dg.max(di);
        if v > eps {
            let which = if dg > eps { "D_G" } else { "D_I" };
            witnesses.push(Witness::at(m.point, format!("not in {which}")));
        }
        worst = worst.max(v);
    }
    AssertionResult::judged(id, worst <= eps, worst, witnesses)
}

fn semi_permanent_missed(a: &RegionAnalysis) -> AssertionResult {
    let id = AssertionId::SemiPermanentMissed;
    if !a.permanent.d_p.is_empty() || a.permanent.d_sp.is_empty() {
        return AssertionResult::vacuous(id, "requires D_P empty and D_SP non-empty");
    }
    let missed: Vec<Witness> = a
        .permanent
        .d_sp
        .iter()
        .filter(|m| !(a.d_g.contains(m.point) && a.d_i.contains(m.point)))
        .map(|m| Witness::at(m.point, "semi-permanent point outside D_G ∩ D_I"))
        .collect();
    if missed.is_empty() {
        AssertionResult::vacuous(id, "D_SP ⊆ D_G ∩ D_I in this scene")
    } else {
        AssertionResult::judged(id, true, 0.0, missed)
    }
}

fn provenance(scene: &Scene, a: &RegionAnalysis) -> AssertionResult {
    let id = AssertionId::Provenance;
    let eps = a.tolerances.eps_set;
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut witnesses = Vec::new();
    let mut couples = Vec::new();
    for m in a.d_g.iter() {
        match m.provenance {
            Some(Provenance::CoupleImage) => couples.push(m),
            Some(Provenance::SingleImage) => {
                if a.zero_union.contains(m.point) {
                    ok = false;
                    witnesses.push(Witness::at(m.point, "single image on a photographed meeting"));
                }
            }
            _ => {
                ok = false;
                witnesses.push(Witness::at(m.point, "photographed point without provenance"));
            }
        }
    }
    for m in &couples {
        let d = a.zero_union.nearest_distance(m.point).unwrap_or(f64::INFINITY);
        if d > eps {
            ok = false;
            witnesses.push(Witness::at(m.point, "couple image outside U 0D_R"));
        }
        worst = worst.max(d);
        let objects: std::collections::BTreeSet<u8> = m.sources.iter().map(|s| s.object_id).collect();
        if objects.len() != 2 {
            ok = false;
            witnesses.push(Witness::at(m.point, "couple image with a single object"));
        }
        let films: Vec<_> = m
            .sources
            .iter()
            .filter_map(|s| a.emissions.iter().find(|e| e.particle == *s))
            .filter_map(|e| project(e.event.pos, scene.film()).ok())
            .collect();
        for w in films.windows(2) {
            let d = w[0].distance(&w[1]);
            if d > COUPLE_FILM_TOL {
                ok = false;
                witnesses.push(Witness::at(m.point, format!("couple film images {d} apart")));
            }
        }
    }
    for z in a.zero_union.iter() {
        let d = a.d_g.nearest_distance(z.point).unwrap_or(f64::INFINITY);
        let tagged = a
            .d_g
            .find(z.point)
            .is_some_and(|m| m.provenance == Some(Provenance::CoupleImage));
        if !tagged {
            ok = false;
            witnesses.push(Witness::at(z.point, "photographed meeting without a couple image"));
        }
        worst = worst.max(d);
    }
    for m in a.unphotographed_contacts() {
        witnesses.push(Witness::at(m.point, "contact locus photographed as a single image"));
    }
    AssertionResult::judged(id, ok && worst <= eps, worst, witnesses)
}

fn rail(scene: &Scene) -> Result<Option<AssertionResult>> {
    let residuals = rail_residuals(scene)?;
    if residuals.is_empty() {
        return Ok(None);
    }
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    for (particle, t, point, r) in residuals {
        if r > RAIL_RESIDUAL_TOL {
            witnesses.push(Witness {
                point: Some(point),
                t: Some(t),
                particle: Some(particle),
                note: format!("{particle} is {r} off the rail"),
            });
        }
        worst = worst.max(r);
    }
    Ok(Some(AssertionResult::judged(
        AssertionId::Rail,
        worst <= RAIL_RESIDUAL_TOL,
        worst,
        witnesses,
    )))
}
