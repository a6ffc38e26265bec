//! Finite point sets with tolerance-qualified membership.

use std::collections::HashMap;
use std::fmt;

use crate::kinematics::{ParticleRef, SpatialPoint};
use crate::optics::Provenance;

/// Which region of the contact taxonomy a set plays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionRole {
    /// `D_R(t)`: loci of couples meeting at `t`.
    Retarded { t: f64 },
    /// `⁰D_R(t)`: the part of `D_R(t)` on the sphere `|OP| = −c t`.
    ZeroRetarded { t: f64 },
    /// `D_I`: union of all `D_R(t)` over the photographic interval.
    Integrated,
    /// Multi-meeting points of `D_I`.
    MultiMeeting,
    /// `D_P`: intersection of all `D_R(t)` when none is empty.
    Permanent,
    /// `D_SP`: intersection of the non-empty `D_R(t)`.
    SemiPermanent,
    /// `⋃ₜ ⁰D_R(t)`.
    ZeroUnion,
    /// `D_G`: starting points of light reaching the pinhole at `t = 0`.
    Photographed,
}

impl fmt::Display for RegionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionRole::Retarded { t } => write!(f, "D_R({t})"),
            RegionRole::ZeroRetarded { t } => write!(f, "0D_R({t})"),
            RegionRole::Integrated => f.write_str("D_I"),
            RegionRole::MultiMeeting => f.write_str("multi-meeting"),
            RegionRole::Permanent => f.write_str("D_P"),
            RegionRole::SemiPermanent => f.write_str("D_SP"),
            RegionRole::ZeroUnion => f.write_str("U 0D_R"),
            RegionRole::Photographed => f.write_str("D_G"),
        }
    }
}

/// One member of a region with the bookkeeping that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub point: SpatialPoint,
    /// Meeting or emission times attached to this locus, ascending.
    pub times: Vec<f64>,
    pub provenance: Option<Provenance>,
    /// Single points that met at, or emitted from, this locus.
    pub sources: Vec<ParticleRef>,
}

impl RegionPoint {
    pub fn bare(point: SpatialPoint) -> Self {
        Self {
            point,
            times: Vec::new(),
            provenance: None,
            sources: Vec::new(),
        }
    }

    fn absorb(&mut self, other: RegionPoint) {
        self.times.extend(other.times);
        self.times.sort_by(f64::total_cmp);
        self.sources.extend(other.sources);
        self.sources.sort();
        self.sources.dedup();
        self.provenance = match (self.provenance, other.provenance) {
            (Some(Provenance::CoupleImage), _) | (_, Some(Provenance::CoupleImage)) => {
                Some(Provenance::CoupleImage)
            }
            (Some(p), _) | (None, Some(p)) => Some(p),
            (None, None) => None,
        };
    }
}

/// Uniform hash grid over points; cell size equals the query radius.
#[derive(Debug, Clone)]
struct PointIndex {
    cell: f64,
    buckets: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl PointIndex {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, p: SpatialPoint) -> (i64, i64, i64) {
        (
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        )
    }

    fn insert(&mut self, p: SpatialPoint, idx: usize) {
        self.buckets.entry(self.key(p)).or_default().push(idx);
    }

    /// Indices stored within the 27 cells around `p`.
    fn neighbours(&self, p: SpatialPoint) -> impl Iterator<Item = usize> + '_ {
        let (kx, ky, kz) = self.key(p);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.buckets
                        .get(&(kx + dx, ky + dy, kz + dz))
                        .into_iter()
                        .flatten()
                        .copied()
                })
            })
        })
    }
}

/// A finite point set in canonical (lexicographic) order. Two points closer
/// than `eps` are the same member.
#[derive(Debug, Clone)]
pub struct RegionSet {
    role: RegionRole,
    eps: f64,
    points: Vec<RegionPoint>,
    index: PointIndex,
}

impl RegionSet {
    pub fn empty(role: RegionRole, eps: f64) -> Self {
        Self {
            role,
            eps,
            points: Vec::new(),
            index: PointIndex::new(eps),
        }
    }

    /// Builds a set from raw members, merging members within `eps` of an
    /// earlier (in canonical order) representative.
    pub fn from_points(role: RegionRole, items: Vec<RegionPoint>, eps: f64) -> Self {
        let mut items = items;
        items.sort_by(|a, b| a.point.lex_cmp(&b.point));
        let mut set = Self::empty(role, eps);
        for item in items {
            match set.nearest_index(item.point) {
                Some((idx, d)) if d <= eps => set.points[idx].absorb(item),
                _ => {
                    set.index.insert(item.point, set.points.len());
                    set.points.push(item);
                }
            }
        }
        set
    }

    pub fn from_bare(role: RegionRole, points: impl IntoIterator<Item = SpatialPoint>, eps: f64) -> Self {
        Self::from_points(role, points.into_iter().map(RegionPoint::bare).collect(), eps)
    }

    pub fn role(&self) -> RegionRole {
        self.role
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_role(mut self, role: RegionRole) -> Self {
        self.role = role;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[RegionPoint] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegionPoint> {
        self.points.iter()
    }

    fn nearest_index(&self, p: SpatialPoint) -> Option<(usize, f64)> {
        self.index
            .neighbours(p)
            .map(|i| (i, self.points[i].point.distance(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Distance to the closest member, exact only up to `eps`: members
    /// farther than one grid cell may be reported as `None`.
    pub fn nearest_within_cell(&self, p: SpatialPoint) -> Option<f64> {
        self.nearest_index(p).map(|(_, d)| d)
    }

    /// Distance to the closest member by exhaustive search.
    pub fn nearest_distance(&self, p: SpatialPoint) -> Option<f64> {
        match self.nearest_index(p) {
            Some((_, d)) => Some(d),
            None => self
                .points
                .iter()
                .map(|m| m.point.distance(p))
                .min_by(f64::total_cmp),
        }
    }

    pub fn find(&self, p: SpatialPoint) -> Option<&RegionPoint> {
        match self.nearest_index(p) {
            Some((i, d)) if d <= self.eps => Some(&self.points[i]),
            _ => None,
        }
    }

    pub fn contains(&self, p: SpatialPoint) -> bool {
        self.find(p).is_some()
    }

    /// Members of `self` not contained in `other`.
    pub fn difference<'a>(&'a self, other: &'a RegionSet) -> impl Iterator<Item = &'a RegionPoint> + 'a {
        self.points.iter().filter(move |m| !other.contains(m.point))
    }

    pub fn is_subset_of(&self, other: &RegionSet) -> bool {
        self.difference(other).next().is_none()
    }

    /// Members of `self` also in `other`; annotations are taken from `self`.
    pub fn intersection(&self, other: &RegionSet) -> RegionSet {
        let kept = self
            .points
            .iter()
            .filter(|m| other.contains(m.point))
            .cloned()
            .collect();
        RegionSet::from_points(self.role, kept, self.eps)
    }

    pub fn union(&self, other: &RegionSet) -> RegionSet {
        let all = self.points.iter().chain(other.points.iter()).cloned().collect();
        RegionSet::from_points(self.role, all, self.eps)
    }
}
