//! CSV profiles and JSON reports with lossless 17-digit floats, written
//! atomically.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::analysis::{CaseFailure, ConvergenceReport, OrderFit, PeakCheck, TailRate};
use crate::dynamics::WaveProfile;
use crate::error::{Error, Result};
use crate::kdv::RemainderField;

pub const CSV_HEADER: &str = "xi,n,u,phi,E,n_kdv,n_R,u_R,phi_R";
pub const SCHEMA_VERSION: u32 = 1;

/// `d.dddddddddddddddde±x`: 17 significant digits, enough to round-trip
/// any double.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn profile_to_csv(profile: &WaveProfile, field: &RemainderField) -> Result<String> {
    profile.check_lengths()?;
    if field.xi != profile.xi {
        return Err(Error::GridMismatch(
            "remainders were computed on a different grid".into(),
        ));
    }
    let mut out = String::with_capacity(profile.len() * 9 * 24);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..profile.len() {
        let row = [
            profile.xi[i],
            profile.n[i],
            profile.u[i],
            profile.phi[i],
            profile.e[i],
            field.n_kdv[i],
            field.n_r[i],
            field.u_r[i],
            field.phi_r[i],
        ];
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Columns of a profile CSV, in header order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub columns: Vec<Vec<f64>>,
}

impl ProfileTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        CSV_HEADER
            .split(',')
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn parse_profile_csv(text: &str) -> Result<ProfileTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::GridMismatch(format!(
                "unexpected header {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let width = CSV_HEADER.split(',').count();
    let mut columns = vec![Vec::new(); width];
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(Error::GridMismatch(format!(
                "row {} has {} fields",
                row + 1,
                cells.len()
            )));
        }
        for (col, cell) in cells.iter().enumerate() {
            let v = cell
                .parse::<f64>()
                .map_err(|e| Error::GridMismatch(format!("row {}: {cell:?}: {e}", row + 1)))?;
            columns[col].push(v);
        }
    }
    Ok(ProfileTable { columns })
}

/// serde_json formatter that prints every float with [`format_float`].
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloatFormatter;

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with [`ExactFloatFormatter`]. Non-finite floats become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Serialize)]
struct ReportParams {
    sigma: f64,
    gamma: f64,
    sound_speed: f64,
    alpha: f64,
    dxi: f64,
    xi_max: f64,
    tail_cut: f64,
    drift_tolerance: f64,
}

#[derive(Debug, Serialize)]
struct FieldColumns {
    order: usize,
    #[serde(rename = "n_R")]
    n_r: Vec<f64>,
    #[serde(rename = "u_R")]
    u_r: Vec<f64>,
    #[serde(rename = "phi_R")]
    phi_r: Vec<f64>,
    weighted: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SupNorms {
    #[serde(rename = "n_R")]
    n_r: Vec<f64>,
    #[serde(rename = "u_R")]
    u_r: Vec<f64>,
    #[serde(rename = "phi_R")]
    phi_r: Vec<f64>,
    weighted: Vec<f64>,
    derivatives: Vec<FieldColumns>,
}

#[derive(Debug, Serialize)]
struct DerivativeOrder {
    order: usize,
    #[serde(flatten)]
    fit: OrderFit,
}

#[derive(Debug, Serialize)]
struct FittedOrder {
    #[serde(flatten)]
    k0: OrderFit,
    derivatives: Vec<DerivativeOrder>,
}

#[derive(Debug, Serialize)]
struct WeightedConstants {
    values: Vec<f64>,
    spread: f64,
    alpha_flag: bool,
}

#[derive(Debug, Serialize)]
struct ReportDocument<'a> {
    schema_version: u32,
    params: ReportParams,
    epsilons: &'a [f64],
    sup_norms: SupNorms,
    fitted_order: FittedOrder,
    tail_rates: &'a [TailRate],
    peak_checks: &'a [PeakCheck],
    kdv_deviation: Vec<f64>,
    relative_drift: Vec<f64>,
    weighted_constants: WeightedConstants,
    failures: &'a [CaseFailure],
}

/// The sweep report as a JSON document. Per-ε arrays are aligned with
/// `epsilons` and hold `null` where a solve failed.
pub fn report_to_json(report: &ConvergenceReport) -> Result<String> {
    let per_case = |f: &dyn Fn(&crate::analysis::CaseSummary) -> f64| -> Vec<f64> {
        report
            .cases
            .iter()
            .map(|c| c.as_ref().map(f).unwrap_or(f64::NAN))
            .collect()
    };
    let derivatives = (1..=crate::analysis::MAX_DERIVATIVE_ORDER)
        .map(|k| {
            let pick = |f: &dyn Fn(&crate::analysis::DerivativeNorms) -> f64| -> Vec<f64> {
                per_case(&|c| {
                    c.derivative_norms
                        .iter()
                        .find(|d| d.order == k)
                        .map(f)
                        .unwrap_or(f64::NAN)
                })
            };
            FieldColumns {
                order: k,
                n_r: pick(&|d| d.sup.n_r),
                u_r: pick(&|d| d.sup.u_r),
                phi_r: pick(&|d| d.sup.phi_r),
                weighted: pick(&|d| d.weighted.max()),
            }
        })
        .collect();
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION,
        params: ReportParams {
            sigma: report.sigma,
            gamma: report.gamma,
            sound_speed: report.sound_speed,
            alpha: report.alpha,
            dxi: report.config.dxi,
            xi_max: report.config.xi_max,
            tail_cut: report.config.tail_cut,
            drift_tolerance: report.config.drift_tolerance,
        },
        epsilons: &report.epsilons,
        sup_norms: SupNorms {
            n_r: per_case(&|c| c.sup_norms.n_r),
            u_r: per_case(&|c| c.sup_norms.u_r),
            phi_r: per_case(&|c| c.sup_norms.phi_r),
            weighted: per_case(&|c| c.weighted_sup),
            derivatives,
        },
        fitted_order: FittedOrder {
            k0: report.fitted_order,
            derivatives: report
                .derivative_orders
                .iter()
                .enumerate()
                .map(|(i, fit)| DerivativeOrder {
                    order: i + 1,
                    fit: *fit,
                })
                .collect(),
        },
        tail_rates: &report.tail_rates,
        peak_checks: &report.peak_checks,
        kdv_deviation: per_case(&|c| c.kdv_deviation),
        relative_drift: per_case(&|c| c.relative_drift),
        weighted_constants: WeightedConstants {
            values: per_case(&|c| c.weighted_sup / (c.epsilon * c.epsilon)),
            spread: report.weighted_constant_spread,
            alpha_flag: report.alpha_flag,
        },
        failures: &report.failures,
    };
    to_json_string(&doc)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{solve_profile, SolverConfig};
    use crate::kdv::compute_remainders;
    use crate::model::ModelParams;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(3.0), "3.0000000000000000e0");
        assert_eq!(format_float(-0.0), "-0.0000000000000000e0");
        for x in [std::f64::consts::PI, 1e-300, 5e-324, f64::MAX, -2.5e17] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_floats_are_exact_and_nan_is_null() {
        let s = to_json_string(&(0.1f64, f64::NAN, 7u32)).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,null,7]\n");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_round_trip() {
        let p = ModelParams::new(0.0, 1.0, 0.1);
        let cfg = SolverConfig {
            xi_max: 3.0,
            ..SolverConfig::default()
        };
        let prof = solve_profile(&p, &cfg).unwrap();
        let field = compute_remainders(&prof, 0.5).unwrap();
        let text = profile_to_csv(&prof, &field).unwrap();
        assert!(text.starts_with("xi,n,u,phi,E,n_kdv,n_R,u_R,phi_R\n"));
        assert!(text.ends_with('\n') && !text.contains(",\n") && !text.contains('\r'));
        let table = parse_profile_csv(&text).unwrap();
        assert_eq!(table.column("xi").unwrap(), &prof.xi[..]);
        assert_eq!(table.column("n").unwrap(), &prof.n[..]);
        assert_eq!(table.column("E").unwrap(), &prof.e[..]);
        assert_eq!(table.column("phi_R").unwrap(), &field.phi_r[..]);
        assert!(table.column("nope").is_none());
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(parse_profile_csv("a,b\n1,2\n").is_err());
        assert!(parse_profile_csv(&format!("{CSV_HEADER}\n1,2\n")).is_err());
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "first\n").unwrap();
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let missing = dir.path().join("no/such/dir/out.csv");
        assert!(write_atomic(&missing, "x").is_err());
        assert!(!missing.exists());
    }
}
