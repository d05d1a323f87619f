//! Report types and their JSON / CSV renderings.
//!
//! CSV output starts with a `# report: {...}` line carrying every field of
//! the report except its rows, followed by an ordinary CSV table. Keys of
//! distributions are written as `;`-separated components, each a
//! space-separated coefficient vector in the power basis of `Z[ζ_r]`.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Format};
use crate::cyclotomic::CycInt;
use crate::error::{Error, Result};

const HEADER_PREFIX: &str = "# report: ";

/// A report with a row table.
pub trait Report: Serialize {
    fn passed(&self) -> bool;
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
}

pub fn render<R: Report>(report: &R, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut summary = serde_json::to_value(report)?;
            if let Some(obj) = summary.as_object_mut() {
                obj.remove("rows");
            }
            let mut out = format!("{HEADER_PREFIX}{}\n", serde_json::to_string(&summary)?);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(report.csv_header()).map_err(csv_err)?;
            for row in report.csv_rows() {
                w.write_record(&row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?);
            Ok(out)
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn key_to_cell(key: &[CycInt]) -> String {
    key.iter()
        .map(|c| c.coeffs().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn key_from_cell(r: u32, cell: &str) -> Result<Vec<CycInt>> {
    cell.split(';')
        .map(|comp| {
            let coeffs = comp
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(CycInt::from_coeffs(r, coeffs))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Empirical,
    Theory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub key: Vec<CycInt>,
    /// exact probability or frequency, `num/den`
    pub prob: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wilson_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wilson_high: Option<f64>,
}

/// Law of `(S_d)_{d ∈ divisors}`, either tallied over a family or computed
/// from the site model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub kind: DistributionKind,
    pub config: ExperimentConfig,
    pub q: u32,
    pub r: u32,
    pub divisors: Vec<u32>,
    /// members visited (exhaustive), draws (Monte Carlo) or sites (theory)
    pub size: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_family_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_propagation_violations: Option<u64>,
    #[serde(default)]
    pub rows: Vec<DistributionRow>,
}

impl Report for DistributionReport {
    fn passed(&self) -> bool {
        let size_ok = self.expected_family_size.is_none_or(|n| n == self.size);
        size_ok && self.zero_propagation_violations.unwrap_or(0) == 0
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["key", "prob", "count", "wilson_low", "wilson_high"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                vec![
                    key_to_cell(&row.key),
                    row.prob.clone(),
                    opt(&row.count),
                    opt(&row.wilson_low),
                    opt(&row.wilson_high),
                ]
            })
            .collect()
    }
}

impl DistributionReport {
    /// Reads either rendering; keys are canonicalised.
    pub fn parse(text: &str) -> Result<Self> {
        let mut report: DistributionReport = if let Some(rest) = text.strip_prefix(HEADER_PREFIX) {
            let (head, table) = rest.split_once('\n').unwrap_or((rest, ""));
            let mut report: DistributionReport = serde_json::from_str(head)?;
            let mut rd = csv::Reader::from_reader(table.as_bytes());
            for rec in rd.records() {
                let rec = rec.map_err(csv_err)?;
                let field = |i: usize| rec.get(i).unwrap_or("");
                let num = |i: usize| -> Result<Option<f64>> {
                    match field(i) {
                        "" => Ok(None),
                        s => s.parse().map(Some).map_err(|e| Error::Parse(format!("{s:?}: {e}"))),
                    }
                };
                report.rows.push(DistributionRow {
                    key: key_from_cell(report.r, field(0))?,
                    prob: field(1).to_string(),
                    count: match field(2) {
                        "" => None,
                        s => Some(s.parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))?),
                    },
                    wilson_low: num(3)?,
                    wilson_high: num(4)?,
                });
            }
            report
        } else {
            serde_json::from_str(text)?
        };
        for row in &mut report.rows {
            for c in &mut row.key {
                *c = CycInt::from_coeffs(c.conductor(), c.coeffs().to_vec());
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub key: Vec<CycInt>,
    pub empirical: f64,
    pub theory: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config: ExperimentConfig,
    pub q: u32,
    pub r: u32,
    pub divisors: Vec<u32>,
    pub family_size: u64,
    pub min_degree: u32,
    /// `q^{-min d/2}`
    pub error_scale: f64,
    pub total_variation: f64,
    pub total_variation_exact: String,
    pub threshold: f64,
    pub pass: bool,
    pub rows: Vec<ComparisonRow>,
}

impl Report for ComparisonReport {
    fn passed(&self) -> bool {
        self.pass
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["key", "empirical", "theory", "gap"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| vec![key_to_cell(&r.key), r.empirical.to_string(), r.theory.to_string(), r.gap.to_string()])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub degrees: Vec<u32>,
    pub admissible: bool,
    pub members: u64,
    pub mismatches: u64,
    pub bound_checked: u64,
    pub bound_violations: u64,
    pub reducible_members: u64,
    pub error: Option<String>,
}

impl CountRow {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.mismatches == 0 && self.bound_violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub config: ExperimentConfig,
    pub members: u64,
    pub mismatches: u64,
    pub bound_checked: u64,
    pub bound_violations: u64,
    pub pass: bool,
    pub rows: Vec<CountRow>,
}

impl Report for CountReport {
    fn passed(&self) -> bool {
        self.pass
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "degrees",
            "admissible",
            "members",
            "mismatches",
            "bound_checked",
            "bound_violations",
            "reducible_members",
            "error",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
                    r.admissible.to_string(),
                    r.members.to_string(),
                    r.mismatches.to_string(),
                    r.bound_checked.to_string(),
                    r.bound_violations.to_string(),
                    r.reducible_members.to_string(),
                    opt(&r.error),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub points: u32,
    pub degree: u32,
    pub brute: Option<u64>,
    pub predicted: f64,
    pub ratio: Option<f64>,
    pub relative_error: Option<f64>,
    pub error_scale: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub config: ExperimentConfig,
    pub slots: u32,
    /// per number of prescribed points: relative error non-increasing in degree
    pub monotone: Vec<(u32, bool)>,
    pub pass: bool,
    pub rows: Vec<AsymptoticRow>,
}

impl Report for AsymptoticReport {
    fn passed(&self) -> bool {
        self.pass
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["points", "degree", "brute", "predicted", "ratio", "relative_error", "error_scale", "error"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.points.to_string(),
                    r.degree.to_string(),
                    opt(&r.brute),
                    r.predicted.to_string(),
                    opt(&r.ratio),
                    opt(&r.relative_error),
                    r.error_scale.to_string(),
                    opt(&r.error),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRow {
    pub q: u32,
    pub n: u32,
    pub enumerated: Option<u64>,
    pub closed_form: Option<u64>,
    pub matches: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicReport {
    pub config: ExperimentConfig,
    pub pass: bool,
    pub rows: Vec<HeuristicRow>,
}

impl Report for HeuristicReport {
    fn passed(&self) -> bool {
        self.pass
    }

    fn csv_header(&self) -> Vec<&'static str> {
        vec!["q", "n", "enumerated", "closed_form", "matches", "error"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.q.to_string(),
                    r.n.to_string(),
                    opt(&r.enumerated),
                    opt(&r.closed_form),
                    r.matches.to_string(),
                    opt(&r.error),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DistributionReport {
        DistributionReport {
            kind: DistributionKind::Empirical,
            config: ExperimentConfig::default(),
            q: 5,
            r: 4,
            divisors: vec![2, 4],
            size: 3,
            expected_family_size: Some(3),
            min_degree: Some(1),
            zero_propagation_violations: Some(0),
            rows: vec![
                DistributionRow {
                    key: vec![CycInt::from_int(4, -1), CycInt::from_coeffs(4, vec![1, -2])],
                    prob: "1/3".into(),
                    count: Some(1),
                    wilson_low: None,
                    wilson_high: None,
                },
                DistributionRow {
                    key: vec![CycInt::from_int(4, 2), CycInt::from_coeffs(4, vec![0, 3])],
                    prob: "2/3".into(),
                    count: Some(2),
                    wilson_low: Some(0.25),
                    wilson_high: Some(0.9),
                },
            ],
        }
    }

    #[test]
    fn json_and_csv_round_trip() {
        let rep = sample();
        for fmt in [Format::Json, Format::Csv] {
            let text = render(&rep, fmt).unwrap();
            assert_eq!(DistributionReport::parse(&text).unwrap(), rep, "{fmt:?}");
        }
    }

    #[test]
    fn csv_starts_with_report_header() {
        let text = render(&sample(), Format::Csv).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# report: {"));
        assert_eq!(lines.next().unwrap(), "key,prob,count,wilson_low,wilson_high");
        assert_eq!(lines.next().unwrap(), "-1 0;1 -2,1/3,1,,");
    }

    #[test]
    fn key_cells_canonicalise() {
        // ζ_4^2 = -1
        let k = key_from_cell(4, "0 0 1").unwrap();
        assert_eq!(k, vec![CycInt::from_int(4, -1)]);
        assert!(key_from_cell(4, "1 x").is_err());
    }
}
