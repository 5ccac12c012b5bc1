use combkit::tradeoff::{curve_d_of_i_branch, CurveBranch};
use combkit::{Result, TradeoffPoint};

use crate::args::{Branch, CurveArgs, Format};
use crate::output::sig15;

pub const HEADER: &str = "I,D,x,y,F,G,p";

/// `points` samples of the curve, uniform in `I` over `[0, 1]`.
pub fn sample(d: usize, points: usize, branch: CurveBranch) -> Result<Vec<TradeoffPoint>> {
    (0..points)
        .map(|k| {
            let info = k as f64 / (points - 1) as f64;
            match branch {
                CurveBranch::Lower => Ok(TradeoffPoint::from_info(info, d)?.with_inferred_p()),
                // the upper root has no seed behind it; only I and D are meaningful
                CurveBranch::Upper => {
                    let dist = curve_d_of_i_branch(info, d, branch)?;
                    Ok(TradeoffPoint {
                        d,
                        p: None,
                        x: f64::NAN,
                        y: f64::NAN,
                        f: f64::NAN,
                        g: f64::NAN,
                        info,
                        disturbance: dist,
                    })
                }
            }
        })
        .collect()
}

pub fn csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for pt in points {
        let p = pt.p.map_or_else(String::new, sig15);
        let row =
            [pt.info, pt.disturbance, pt.x, pt.y, pt.f, pt.g]
                .map(|v| if v.is_nan() { String::new() } else { sig15(v) });
        out.push_str(&row.join(","));
        out.push(',');
        out.push_str(&p);
        out.push('\n');
    }
    out
}

pub fn run(args: &CurveArgs) -> Result<String> {
    let branch = match args.branch {
        Branch::Lower => CurveBranch::Lower,
        Branch::Upper => CurveBranch::Upper,
    };
    let points = sample(args.common.d(), args.points as usize, branch)?;
    Ok(match args.format {
        Format::Csv => csv(&points),
        Format::Json => serde_json::to_string_pretty(&points).expect("points serialize") + "\n",
    })
}
