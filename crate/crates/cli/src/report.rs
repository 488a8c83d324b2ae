//! CSV tables and key=value manifests.

use std::path::{Path, PathBuf};

use fracdim::bench::BenchReport;
use fracdim::dimension::{ScaleSample, ScalingCurve};
use fracdim::{Codec, ScaleMode};

use crate::CliError;

pub const CURVE_HEADER: [&str; 6] = ["scale_percent", "width", "height", "pixels", "compressed_bytes", "blank"];
pub const DETAIL_HEADER: [&str; 6] = ["N", "ns", "alpha", "D_true", "D_est", "residual_norm"];
pub const SUMMARY_HEADER: [&str; 4] = ["N", "ns", "UME", "mean_residual_norm"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

/// Shortest round-trip float text; `NaN` for missing values.
pub fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |v| format!("{v}"))
}

pub fn curve_csv(curve: &ScalingCurve) -> Vec<u8> {
    let mut w = writer();
    w.write_record(CURVE_HEADER).expect("in-memory csv");
    for s in &curve.samples {
        w.write_record([
            format!("{}", s.percent),
            s.width.to_string(),
            s.height.to_string(),
            s.pixel_count.to_string(),
            s.compressed_bytes.to_string(),
            s.blank.to_string(),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}

/// Parses a scaling-curve CSV back into a curve. Mode, codec and source
/// dimensions are not stored in the table and must be supplied.
pub fn parse_curve_csv(
    bytes: &[u8],
    mode: ScaleMode,
    codec: Codec,
    source_dims: (usize, usize),
) -> Result<ScalingCurve, CliError> {
    let bad = |e: String| CliError::input(format!("scaling csv: {e}"));
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CURVE_HEADER) {
        return Err(bad("unexpected header".into()));
    }
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad("short row".into()));
        let int = |i: usize| field(i)?.parse::<u64>().map_err(|e| bad(e.to_string()));
        samples.push(ScaleSample {
            percent: field(0)?.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
            width: int(1)? as usize,
            height: int(2)? as usize,
            pixel_count: int(3)? as usize,
            compressed_bytes: int(4)?,
            blank: field(5)?.parse().map_err(|e: std::str::ParseBoolError| bad(e.to_string()))?,
        });
    }
    Ok(ScalingCurve { samples, mode, codec, source_dims })
}

pub fn bench_detail_csv(report: &BenchReport) -> Vec<u8> {
    let mut w = writer();
    w.write_record(DETAIL_HEADER).expect("in-memory csv");
    for cell in &report.cells {
        for e in &cell.estimates {
            let fit = e.fit.as_ref().ok();
            w.write_record([
                cell.n_points.to_string(),
                cell.ns.to_string(),
                num(Some(e.alpha)),
                num(Some(e.d_true)),
                num(fit.map(|f| f.dimension)),
                num(fit.map(|f| f.residual_norm)),
            ])
            .expect("in-memory csv");
        }
    }
    finish(w)
}

pub fn bench_summary_csv(report: &BenchReport) -> Vec<u8> {
    let mut w = writer();
    w.write_record(SUMMARY_HEADER).expect("in-memory csv");
    for cell in &report.cells {
        w.write_record([
            cell.n_points.to_string(),
            cell.ns.to_string(),
            num(cell.ume),
            num(cell.mean_residual_norm),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}

/// Ordered key=value pairs written next to an output file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.set("command", command);
        m.set("tool_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }

    /// `out.csv` gets `out.csv.manifest`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn write_for(&self, output: &Path) -> Result<(), CliError> {
        write_file(&Self::path_for(output), self.render().as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

pub fn join_usize(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> ScalingCurve {
        let samples = [(5.0, 7u64, true), (12.5, 900, false), (100.0, 123_456_789_012, false)]
            .iter()
            .map(|&(p, s, blank)| ScaleSample {
                percent: p,
                width: 3,
                height: 2,
                pixel_count: 6,
                compressed_bytes: s,
                blank,
            })
            .collect();
        ScalingCurve { samples, mode: ScaleMode::GrayBox, codec: Codec::Deflate, source_dims: (60, 40) }
    }

    #[test]
    fn curve_csv_layout() {
        let text = String::from_utf8(curve_csv(&curve())).unwrap();
        assert_eq!(
            text,
            "scale_percent,width,height,pixels,compressed_bytes,blank\n\
             5,3,2,6,7,true\n\
             12.5,3,2,6,900,false\n\
             100,3,2,6,123456789012,false\n"
        );
    }

    #[test]
    fn curve_csv_parses_back() {
        let c = curve();
        let parsed = parse_curve_csv(&curve_csv(&c), c.mode, c.codec, c.source_dims).unwrap();
        assert_eq!(parsed, c);
        assert!(parse_curve_csv(b"a,b\n1,2\n", c.mode, c.codec, c.source_dims).is_err());
    }

    #[test]
    fn manifest_render_and_parse() {
        let mut m = RunManifest::new("estimate");
        m.set("scales", join_f64(&[5.0, 6.5])).set("n_s", 8).set("n_s", 9);
        let text = m.render();
        assert!(text.starts_with("command=estimate\ntool_version="));
        assert!(text.ends_with("scales=5,6.5\nn_s=9\n"));
        assert_eq!(RunManifest::parse(&text), m);
        assert_eq!(RunManifest::path_for(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest"));
    }

    #[test]
    fn missing_numbers_are_nan() {
        assert_eq!(num(None), "NaN");
        assert_eq!(num(Some(0.1)), "0.1");
        assert_eq!(num(Some(2.0)), "2");
    }
}
