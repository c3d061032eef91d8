//! Tabular output. Floats are written with 17 significant digits so that
//! every value round-trips exactly.

use std::fmt::Write as _;

use serde::Serialize;

use crate::anisotropy::MapSample;
use crate::lattice::CentroidSample;
use crate::momentum::DispersionSample;

/// 17 significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// `kx,ky,kz,phase,vx,vy,vz,speed,degenerate`. Velocity columns are empty at
/// branch points.
pub fn surface_csv(samples: &[DispersionSample]) -> String {
    let mut out = String::from("kx,ky,kz,phase,vx,vy,vz,speed,degenerate\n");
    for s in samples {
        let [kx, ky, kz] = s.kappa;
        let _ = write!(
            out,
            "{},{},{},{},",
            fmt_num(kx),
            fmt_num(ky),
            fmt_num(kz),
            fmt_num(s.phase)
        );
        match s.velocity {
            Some(v) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},false",
                    fmt_num(v.vx),
                    fmt_num(v.vy),
                    fmt_num(v.vz),
                    fmt_num(v.speed())
                );
            }
            None => out.push_str(",,,,true\n"),
        }
    }
    out
}

/// `step,cx,cy,cz,sx,sy,sz,norm`.
pub fn trajectory_csv(samples: &[CentroidSample]) -> String {
    let mut out = String::from("step,cx,cy,cz,sx,sy,sz,norm\n");
    for s in samples {
        let _ = write!(out, "{}", s.step);
        for v in s.position.iter().chain(&s.spread) {
            let _ = write!(out, ",{}", fmt_num(*v));
        }
        let _ = writeln!(out, ",{}", fmt_num(s.norm));
    }
    out
}

/// `theta,phi,s`.
pub fn map_csv(samples: &[MapSample]) -> String {
    let mut out = String::from("theta,phi,s\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(s.theta),
            fmt_num(s.phi),
            fmt_num(s.s)
        );
    }
    out
}
