//! SDPA sparse text format for embedded problems.
//!
//! SDPA's dual form is `max <F0, Y>  s.t.  <F_i, Y> = c_i, Y PSD`, so the
//! real standard form `min <C, X>` is written with `F0 = -C`, `F_i = A_i`
//! and `c = b`. The LP slack block is written as a diagonal block.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::embed::{embed_real, RealSdp};
use super::{SdpError, SdpProblem};

fn push_block(out: &mut String, mat: usize, blk: usize, m: &nalgebra::DMatrix<f64>, sign: f64) {
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let v = sign * m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{mat} {blk} {} {} {v:.17e}", i + 1, j + 1);
            }
        }
    }
}

pub fn to_sdpa(problem: &RealSdp) -> String {
    let mut out = String::new();
    let nb = problem.psd_dims.len() + usize::from(problem.lp_dim > 0);
    let _ = writeln!(out, "\"embedded real SDP: min <C,X> s.t. <A_i,X> = b_i");
    let _ = writeln!(out, "{}", problem.rows.len());
    let _ = writeln!(out, "{nb}");
    let mut sizes: Vec<String> = problem.psd_dims.iter().map(|n| n.to_string()).collect();
    if problem.lp_dim > 0 {
        sizes.push(format!("-{}", problem.lp_dim));
    }
    let _ = writeln!(out, "{}", sizes.join(" "));
    let b: Vec<String> = problem.b.iter().map(|v| format!("{v:.17e}")).collect();
    let _ = writeln!(out, "{}", b.join(" "));

    let lp_blk = problem.psd_dims.len() + 1;
    for (k, (c, &n)) in problem.c_blocks.iter().zip(&problem.psd_dims).enumerate() {
        if let Some(c) = c {
            push_block(&mut out, 0, k + 1, &c.to_dense(n), -1.0);
        }
    }
    for (k, v) in problem.c_lp.iter().enumerate() {
        if *v != 0.0 {
            let _ = writeln!(out, "0 {lp_blk} {} {} {:.17e}", k + 1, k + 1, -v);
        }
    }
    for (i, row) in problem.rows.iter().enumerate() {
        for (k, (a, &n)) in row.blocks.iter().zip(&problem.psd_dims).enumerate() {
            if let Some(a) = a {
                push_block(&mut out, i + 1, k + 1, &a.to_dense(n), 1.0);
            }
        }
        for &(k, v) in &row.lp {
            let _ = writeln!(out, "{} {lp_blk} {} {} {v:.17e}", i + 1, k + 1, k + 1);
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_sdpa(problem: &SdpProblem, path: &Path) -> Result<(), DumpError> {
    let real = embed_real(problem, false)?;
    std::fs::write(path, to_sdpa(&real))?;
    Ok(())
}
