//! CSV plot data derived from a stored profile.

use std::io::Write;

use clap::ValueEnum;
use glvortex::asymptotics::{envelope_values, leading_coeffs, select_envelope, Branch};
use glvortex::model::Component;
use glvortex::Profile;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    /// r, f_plus, f_minus
    Profiles,
    /// r, df_plus, df_minus
    Slopes,
    /// r, (f-t)r² and (f-t-a/r²)r⁴ per component
    Tail,
    /// r ≥ R: lower envelope, profile, upper envelope per component
    Envelope,
}

pub fn export<W: Write>(profile: &Profile, kind: ExportKind, out: W) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    let grid = &profile.grid;
    let r = grid.nodes();
    let num = |x: f64| x.to_string();
    match kind {
        ExportKind::Profiles => {
            w.write_record(["r", "f_plus", "f_minus"])?;
            for i in 0..r.len() {
                w.write_record([num(r[i]), num(profile.f_plus[i]), num(profile.f_minus[i])])?;
            }
        }
        ExportKind::Slopes => {
            w.write_record(["r", "df_plus", "df_minus"])?;
            for i in 0..r.len() {
                w.write_record([
                    num(r[i]),
                    num(grid.derivative(&profile.f_plus, i)),
                    num(grid.derivative(&profile.f_minus, i)),
                ])?;
            }
        }
        ExportKind::Tail => {
            let a = leading_coeffs(&profile.params, profile.degrees);
            w.write_record([
                "r",
                "tail2_plus",
                "tail2_minus",
                "tail4_plus",
                "tail4_minus",
            ])?;
            for i in 0..r.len() {
                let r2 = r[i] * r[i];
                let cols = Component::BOTH.map(|c| {
                    let (_, t, _) = profile.params.component(c);
                    let d = profile.component(c)[i] - t;
                    (d * r2, d * r2 * r2 - a.a(c) * r2)
                });
                w.write_record([
                    num(r[i]),
                    num(cols[0].0),
                    num(cols[1].0),
                    num(cols[0].1),
                    num(cols[1].1),
                ])?;
            }
        }
        ExportKind::Envelope => {
            let spec = select_envelope(
                &profile.params,
                profile.degrees,
                Branch::default_for(profile.params.b),
            )?;
            w.write_record([
                "r",
                "lower_plus",
                "f_plus",
                "upper_plus",
                "lower_minus",
                "f_minus",
                "upper_minus",
            ])?;
            for i in (0..r.len()).filter(|&i| r[i] >= spec.r) {
                let [p, m] = Component::BOTH
                    .map(|c| envelope_values(&profile.params, profile.degrees, &spec, c, r[i]));
                w.write_record([
                    num(r[i]),
                    num(p.0),
                    num(profile.f_plus[i]),
                    num(p.1),
                    num(m.0),
                    num(profile.f_minus[i]),
                    num(m.1),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
