use std::io::Write;
use std::path::Path;

use super::{CurvePoint, FrontierPoint};
use crate::error::{Error, Result};

pub const CURVE_HEADER: [&str; 9] =
    ["T", "trials", "p_hat", "mean_in_sample", "se_in_sample", "mean_out_of_sample", "spec", "radius", "seed"];
pub const FRONTIER_HEADER: [&str; 7] =
    ["spec", "radius", "decay_rate", "decay_r2", "points_used", "asymptotic_in_sample", "se"];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

fn parse<T: std::str::FromStr>(path: &Path, field: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Data(format!("{}: cannot parse '{field}'", path.display())))
}

/// Writes curve records ordered by `(T, spec, radius)`. Floats use Rust's
/// shortest round-trip formatting, so [`read_curve_csv`] restores them exactly.
pub fn write_csv(records: &[CurvePoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    write_curve_records(records, file).map_err(csv_err(path))
}

/// [`write_csv`] into any writer.
pub fn write_curve_records<W: Write>(records: &[CurvePoint], sink: W) -> csv::Result<()> {
    let mut sorted: Vec<&CurvePoint> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.horizon.cmp(&b.horizon).then_with(|| a.spec.cmp(&b.spec)).then_with(|| a.radius.total_cmp(&b.radius))
    });
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CURVE_HEADER)?;
    for p in sorted {
        w.write_record([
            p.horizon.to_string(),
            p.trials.to_string(),
            p.p_hat.to_string(),
            p.mean_in_sample.to_string(),
            p.se_in_sample.to_string(),
            p.mean_out_of_sample.to_string(),
            p.spec.clone(),
            p.radius.to_string(),
            p.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != CURVE_HEADER.len() {
            return Err(Error::Data(format!("{}: expected {} columns", path.display(), CURVE_HEADER.len())));
        }
        let trials: usize = parse(path, &rec[1])?;
        let p_hat: f64 = parse(path, &rec[2])?;
        out.push(CurvePoint {
            horizon: parse(path, &rec[0])?,
            trials,
            disappointments: (p_hat * trials as f64).round() as usize,
            p_hat,
            mean_in_sample: parse(path, &rec[3])?,
            se_in_sample: parse(path, &rec[4])?,
            mean_out_of_sample: parse(path, &rec[5])?,
            spec: rec[6].to_string(),
            radius: parse(path, &rec[7])?,
            seed: parse(path, &rec[8])?,
        });
    }
    Ok(out)
}

/// Writes frontier points in the given order.
pub fn write_frontier_csv(points: &[FrontierPoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    write_frontier_records(points, file).map_err(csv_err(path))
}

/// [`write_frontier_csv`] into any writer.
pub fn write_frontier_records<W: Write>(points: &[FrontierPoint], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(FRONTIER_HEADER)?;
    for p in points {
        w.write_record([
            p.spec.name().to_string(),
            p.radius().to_string(),
            p.decay.rate.to_string(),
            p.decay.r_squared.to_string(),
            p.decay.points_used.to_string(),
            p.asymptotic_in_sample.to_string(),
            p.se.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Frontier rows as `(spec, radius, decay_rate, decay_r2, points_used, asymptotic_in_sample, se)`.
#[allow(clippy::type_complexity)]
pub fn read_frontier_csv(path: &Path) -> Result<Vec<(String, f64, f64, f64, usize, f64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        out.push((
            rec[0].to_string(),
            parse(path, &rec[1])?,
            parse(path, &rec[2])?,
            parse(path, &rec[3])?,
            parse(path, &rec[4])?,
            parse(path, &rec[5])?,
            parse(path, &rec[6])?,
        ));
    }
    Ok(out)
}
