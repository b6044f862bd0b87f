//! Listener-rating analysis: normalisation, per-level means and an OLS fit
//! of mean rating against the target parameter, with an F test.
//!
//! Ratings CSV columns:
//! `participant,stimulus,target_valence,target_arousal,rated_valence,rated_arousal`
//! with ratings integers on the 1..=9 scale.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::Error;

pub const RATING_MIN: u8 = 1;
pub const RATING_MAX: u8 = 9;
pub const MIN_LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub participant: String,
    pub stimulus: String,
    pub target_valence: f64,
    pub target_arousal: f64,
    pub rated_valence: i64,
    pub rated_arousal: i64,
}

/// Maps a 1..=9 rating onto `[0, 1]`.
pub fn normalize_rating(raw: i64) -> Option<f64> {
    (RATING_MIN as i64..=RATING_MAX as i64)
        .contains(&raw)
        .then(|| (raw - RATING_MIN as i64) as f64 / (RATING_MAX - RATING_MIN) as f64)
}

pub fn denormalize_rating(x: f64) -> f64 {
    x * (RATING_MAX - RATING_MIN) as f64 + RATING_MIN as f64
}

pub fn read_ratings<R: Read>(reader: R) -> Result<Vec<RatingRow>, Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (i, row) in rdr.deserialize::<RatingRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Data(format!("ratings line {line}: {e}")))?;
        for (name, raw) in [("rated_valence", row.rated_valence), ("rated_arousal", row.rated_arousal)] {
            if normalize_rating(raw).is_none() {
                return Err(Error::Data(format!(
                    "ratings line {line}: {name} = {raw} is outside {RATING_MIN}..={RATING_MAX}"
                )));
            }
        }
        if !row.target_valence.is_finite() || !row.target_arousal.is_finite() {
            return Err(Error::Data(format!("ratings line {line}: target is not a number")));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Valence,
    Arousal,
}

impl Dimension {
    fn target(self, r: &RatingRow) -> f64 {
        match self {
            Dimension::Valence => r.target_valence,
            Dimension::Arousal => r.target_arousal,
        }
    }

    fn rating(self, r: &RatingRow) -> f64 {
        let raw = match self {
            Dimension::Valence => r.rated_valence,
            Dimension::Arousal => r.rated_arousal,
        };
        normalize_rating(raw).expect("ratings are range-checked on read")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub dimension: Dimension,
    pub target: f64,
    pub n: usize,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub dimension: Dimension,
    pub levels: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub f_statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStat {
    pub target_valence: f64,
    pub target_arousal: f64,
    pub n: usize,
    pub mean_valence: f64,
    pub se_valence: f64,
    pub mean_arousal: f64,
    pub se_arousal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub fits: Vec<Fit>,
    pub levels: Vec<LevelStat>,
    pub points: Vec<PointStat>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups values by key in ascending key order.
fn group_by<K: Copy + PartialEq, V: Copy>(mut pairs: Vec<(K, V)>, cmp: impl Fn(&K, &K) -> std::cmp::Ordering) -> Vec<(K, Vec<V>)> {
    pairs.sort_by(|a, b| cmp(&a.0, &b.0));
    let mut out: Vec<(K, Vec<V>)> = Vec::new();
    for (k, v) in pairs {
        match out.last_mut() {
            Some((last, vs)) if *last == k => vs.push(v),
            _ => out.push((k, vec![v])),
        }
    }
    out
}

/// Ordinary least squares of `ys` on `xs` with an F test on one and `n - 2`
/// degrees of freedom. Constant `ys` give slope 0, R² 0 and p 1.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if syy == 0.0 {
        return (0.0, my, 0.0, 0.0, 1.0);
    }
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = 1.0 - ss_res / syy;
    let df = n - 2.0;
    let (f, p) = if ss_res == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (syy - ss_res) / (ss_res / df);
        let dist = FisherSnedecor::new(1.0, df).expect("at least three levels");
        (f, dist.sf(f))
    };
    (slope, intercept, r_squared, f, p)
}

pub fn analyze(rows: &[RatingRow]) -> Result<Report, Error> {
    let mut fits = Vec::new();
    let mut levels = Vec::new();
    for dim in [Dimension::Valence, Dimension::Arousal] {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (dim.target(r), dim.rating(r))).collect();
        let groups = group_by(pairs, |a, b| a.total_cmp(b));
        if groups.len() < MIN_LEVELS {
            return Err(Error::Data(format!(
                "{dim:?} has {} distinct targets; at least {MIN_LEVELS} are needed for a fit",
                groups.len()
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (target, ratings) in &groups {
            let (mean, se) = mean_se(ratings);
            levels.push(LevelStat { dimension: dim, target: *target, n: ratings.len(), mean, se });
            xs.push(*target);
            ys.push(mean);
        }
        let (slope, intercept, r_squared, f_statistic, p_value) = ols(&xs, &ys);
        fits.push(Fit { dimension: dim, levels: xs.len(), slope, intercept, r_squared, f_statistic, p_value });
    }
    let pairs: Vec<((f64, f64), (f64, f64))> = rows
        .iter()
        .map(|r| {
            ((r.target_valence, r.target_arousal), (Dimension::Valence.rating(r), Dimension::Arousal.rating(r)))
        })
        .collect();
    let points = group_by(pairs, |a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .into_iter()
        .map(|((tv, ta), ratings)| {
            let (mv, sv) = mean_se(&ratings.iter().map(|r| r.0).collect::<Vec<_>>());
            let (ma, sa) = mean_se(&ratings.iter().map(|r| r.1).collect::<Vec<_>>());
            PointStat {
                target_valence: tv,
                target_arousal: ta,
                n: ratings.len(),
                mean_valence: mv,
                se_valence: sv,
                mean_arousal: ma,
                se_arousal: sa,
            }
        })
        .collect();
    Ok(Report { fits, levels, points })
}

fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

impl Report {
    pub fn write_regression<W: Write>(&self, out: W) -> Result<(), Error> {
        write_csv(&self.fits, out)
    }

    pub fn write_levels<W: Write>(&self, out: W) -> Result<(), Error> {
        write_csv(&self.levels, out)
    }

    pub fn write_points<W: Write>(&self, out: W) -> Result<(), Error> {
        write_csv(&self.points, out)
    }

    pub fn fit(&self, dim: Dimension) -> &Fit {
        self.fits.iter().find(|f| f.dimension == dim).expect("both dimensions are fitted")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(tv: f64, ta: f64, rv: i64, ra: i64) -> RatingRow {
        RatingRow {
            participant: "p".into(),
            stimulus: "s".into(),
            target_valence: tv,
            target_arousal: ta,
            rated_valence: rv,
            rated_arousal: ra,
        }
    }

    #[test]
    fn normalisation_examples() {
        assert_eq!(normalize_rating(1), Some(0.0));
        assert_eq!(normalize_rating(9), Some(1.0));
        assert_eq!(normalize_rating(5), Some(0.5));
        assert_eq!(normalize_rating(0), None);
        assert_eq!(normalize_rating(10), None);
    }

    #[test]
    fn perfect_fit() {
        let rows: Vec<_> = [1, 3, 5, 7, 9]
            .iter()
            .map(|&r| {
                let t = normalize_rating(r).unwrap();
                row(t, t, r, r)
            })
            .collect();
        let rep = analyze(&rows).unwrap();
        let f = rep.fit(Dimension::Valence);
        assert_eq!((f.slope, f.intercept, f.r_squared, f.p_value), (1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn constant_ratings_are_degenerate() {
        let rows: Vec<_> = [0.0, 0.5, 1.0].iter().map(|&t| row(t, t, 4, 4)).collect();
        let f = analyze(&rows).unwrap().fit(Dimension::Arousal).clone();
        assert_eq!((f.slope, f.r_squared, f.p_value), (0.0, 0.0, 1.0));
    }

    #[test]
    fn too_few_levels() {
        let rows = vec![row(0.0, 0.0, 1, 1), row(1.0, 1.0, 9, 9)];
        assert!(matches!(analyze(&rows), Err(Error::Data(_))));
    }

    #[test]
    fn out_of_range_rating_names_the_line() {
        let csv = "participant,stimulus,target_valence,target_arousal,rated_valence,rated_arousal\n\
                   a,s1,0,0,1,1\na,s2,1,1,10,1\n";
        match read_ratings(csv.as_bytes()) {
            Err(Error::Data(m)) => assert!(m.contains("line 3"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
