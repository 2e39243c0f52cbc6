//! Writes demo mask and signal files for CLI runs. The demo signal is
//! synthesized through a Haar system so it lies in the analysis span and
//! round-trips through transform/reconstruct at machine precision.
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use vnumra::io::{write_mask, write_signal_csv};
use vnumra::pipeline::CoefficientSet;
use vnumra::*;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "/tmp/vnumra-demo".to_string());
    std::fs::create_dir_all(&dir).unwrap();
    let haar = corpus::haar(1);
    write_mask(BufWriter::new(File::create(format!("{dir}/haar.json")).unwrap()), &haar).unwrap();
    let n2 = corpus::nonuniform_n2();
    write_mask(BufWriter::new(File::create(format!("{dir}/n2.json")).unwrap()), &n2).unwrap();

    let time_grid = Grid::new(-2.0, 0.015625, 1024).unwrap();
    let resolution = SystemResolution::matched(time_grid);
    let system =
        build_system(LctParams::fourier(), corpus::haar_bank(1), resolution).unwrap();
    let lat = system.lattice();
    let mut set: CoefficientSet = BTreeMap::new();
    for (i, p) in lat.enumerate(0, 2).into_iter().enumerate() {
        let phase = 0.7 * i as f64;
        set.insert((p.base, p.translate), vec![Complex64::new(phase.cos(), phase.sin() / 2.0)]);
    }
    let pyramid = CoefficientPyramid {
        levels: 1,
        channels: 1,
        lattice: lat,
        approx: set,
        details: vec![vec![BTreeMap::new()]],
    };
    let signal = synthesize(&system, &pyramid).unwrap();
    write_signal_csv(
        BufWriter::new(File::create(format!("{dir}/demo-signal.csv")).unwrap()),
        &signal,
    )
    .unwrap();
    println!("wrote demo files to {dir}");
}
