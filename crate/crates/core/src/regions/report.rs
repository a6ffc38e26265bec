//! JSON region reports. Floating-point values are written with 17
//! significant digits.

use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::Result;
use crate::kinematics::{ParticleRef, SpatialPoint};
use crate::scenes::Scene;

use super::{verify_analysis, AssertionReport, RegionAnalysis, RegionRole, RegionSet};

pub const REPORT_VERSION: u32 = 1;

/// An `f64` serialized as `{:.16e}`; non-finite values become `null`.
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn pt(p: SpatialPoint) -> [Num; 3] {
    [Num(p.x), Num(p.y), Num(p.z)]
}

fn pref(p: ParticleRef) -> (u8, u32) {
    (p.object_id, p.particle_id)
}

#[derive(Serialize)]
struct Interval {
    t_l: Num,
    t_u: Num,
}

#[derive(Serialize)]
struct Shell {
    r_inner: Num,
    r_outer: Num,
}

#[derive(Serialize)]
struct Tols {
    tol_root: Num,
    eps_contact: Num,
    eps_set: Num,
    eps_time: Num,
}

#[derive(Serialize)]
struct Photographed {
    point: [Num; 3],
    t_emit: Option<Num>,
    provenance: Option<&'static str>,
    sources: Vec<(u8, u32)>,
}

#[derive(Serialize)]
struct Slice {
    t: Num,
    points: Vec<[Num; 3]>,
}

#[derive(Serialize)]
struct Regions {
    #[serde(rename = "D_I")]
    d_i: Vec<[Num; 3]>,
    multi_meeting: Vec<[Num; 3]>,
    #[serde(rename = "D_P")]
    d_p: Vec<[Num; 3]>,
    #[serde(rename = "D_SP")]
    d_sp: Vec<[Num; 3]>,
    zero_union: Vec<[Num; 3]>,
    zero_slices: Vec<Slice>,
    #[serde(rename = "D_G")]
    d_g: Vec<Photographed>,
}

#[derive(Serialize)]
struct Contact {
    t: Num,
    locus: [Num; 3],
    first: (u8, u32),
    second: (u8, u32),
    distance: Num,
}

#[derive(Serialize)]
struct WitnessDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<[Num; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    particle: Option<(u8, u32)>,
    note: String,
}

#[derive(Serialize)]
struct AssertionDoc {
    id: &'static str,
    status: &'static str,
    max_violation: Num,
    witnesses: Vec<WitnessDoc>,
}

#[derive(Serialize)]
struct Report {
    version: u32,
    interval: Interval,
    shell: Shell,
    tolerances: Tols,
    slices: usize,
    empty_slices: usize,
    regions: Regions,
    contacts: Vec<Contact>,
    assertions: Vec<AssertionDoc>,
}

fn points(s: &RegionSet) -> Vec<[Num; 3]> {
    s.iter().map(|m| pt(m.point)).collect()
}

/// Serializes an analysis and its assertion report.
pub fn report_json(a: &RegionAnalysis, r: &AssertionReport) -> String {
    let t = &a.tolerances;
    let doc = Report {
        version: REPORT_VERSION,
        interval: Interval {
            t_l: Num(a.interval.t_l),
            t_u: Num(a.interval.t_u),
        },
        shell: Shell {
            r_inner: Num(a.shell.r_inner),
            r_outer: Num(a.shell.r_outer),
        },
        tolerances: Tols {
            tol_root: Num(t.tol_root),
            eps_contact: Num(t.eps_contact),
            eps_set: Num(t.eps_set),
            eps_time: Num(t.eps_time),
        },
        slices: a.permanent.slices,
        empty_slices: a.permanent.empty_slices,
        regions: Regions {
            d_i: points(&a.d_i),
            multi_meeting: points(&a.multi_meeting),
            d_p: points(&a.permanent.d_p),
            d_sp: points(&a.permanent.d_sp),
            zero_union: points(&a.zero_union),
            zero_slices: a
                .zero_slices
                .iter()
                .map(|s| Slice {
                    t: Num(match s.role() {
                        RegionRole::ZeroRetarded { t } => t,
                        _ => f64::NAN,
                    }),
                    points: points(s),
                })
                .collect(),
            d_g: a
                .d_g
                .iter()
                .map(|m| Photographed {
                    point: pt(m.point),
                    t_emit: m.times.first().map(|&t| Num(t)),
                    provenance: m.provenance.map(|p| p.as_str()),
                    sources: m.sources.iter().copied().map(pref).collect(),
                })
                .collect(),
        },
        contacts: a
            .contacts
            .iter()
            .map(|c| Contact {
                t: Num(c.t),
                locus: pt(c.locus),
                first: pref(c.first),
                second: pref(c.second),
                distance: Num(c.distance),
            })
            .collect(),
        assertions: r
            .results
            .iter()
            .map(|x| AssertionDoc {
                id: x.id.as_str(),
                status: x.status.as_str(),
                max_violation: Num(x.max_violation),
                witnesses: x
                    .witnesses
                    .iter()
                    .map(|w| WitnessDoc {
                        point: w.point.map(pt),
                        t: w.t.map(Num),
                        particle: w.particle.map(pref),
                        note: w.note.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

/// Computes and serializes the regions and assertions of a scene.
pub fn region_report_json(scene: &Scene) -> Result<String> {
    let a = RegionAnalysis::compute(scene)?;
    let r = verify_analysis(scene, &a)?;
    Ok(report_json(&a, &r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes::demo_scene;

    #[test]
    fn numbers_have_seventeen_digits() {
        let s = serde_json::to_string(&Num(-2.0)).unwrap();
        assert_eq!(s, "-2.0000000000000000e0");
        assert_eq!(serde_json::to_string(&Num(f64::NAN)).unwrap(), "null");
    }

    #[test]
    fn report_is_valid_json() {
        let text = region_report_json(&demo_scene("needle").unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["regions"]["D_G"].as_array().unwrap().len(), 4);
        assert_eq!(v["assertions"][0]["id"], "1");
    }
}
