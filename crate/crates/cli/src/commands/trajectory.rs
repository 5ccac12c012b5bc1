use combkit::network::trajectories;
use combkit::{Result, Trajectory};

use crate::args::TrajectoryArgs;

pub fn run(args: &TrajectoryArgs) -> Result<Vec<Trajectory>> {
    let d = args.common.d();
    let point = args.point.point(d)?;
    trajectories(point.x, point.y, d, args.samples as usize, args.seed)
}

/// One JSON object per line.
pub fn json_lines(ts: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in ts {
        out.push_str(&serde_json::to_string(t).expect("trajectories serialize"));
        out.push('\n');
    }
    out
}
