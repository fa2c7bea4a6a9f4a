//! Rough throughput probe for the convolution kernels on this machine.

use autonet::conv::{conv3_backward, conv3_forward, ConvSpec};
use autonet::tensor::Tensor;
use std::time::Instant;

fn bench(name: &str, ci: usize, co: usize, dims: [usize; 3], dilation: usize, reps: usize) {
    let spec = ConvSpec::same(ci, co, [3, 3, 3], dilation);
    let in_shape = [1, ci, dims[0], dims[1], dims[2]];
    let len: usize = in_shape.iter().product();
    let x = Tensor::<f32>::from_vec(&in_shape, (0..len).map(|i| (i % 17) as f32 * 0.1).collect())
        .unwrap();
    let w = Tensor::<f32>::full(&spec.weight_shape(), 0.01);

    let t0 = Instant::now();
    let mut out = None;
    for _ in 0..reps {
        out = Some(conv3_forward(&x, &w, &spec).unwrap());
    }
    let fwd = t0.elapsed().as_secs_f64() / reps as f64;
    let out = out.unwrap();

    let t0 = Instant::now();
    for _ in 0..reps {
        conv3_backward(&out, &x, &w, &spec).unwrap();
    }
    let bwd = t0.elapsed().as_secs_f64() / reps as f64;

    let voxels: usize = dims.iter().product();
    let macs = (ci * co * 27 * voxels) as f64;
    println!(
        "{name}: fwd {:.1} ms ({:.2} GMAC/s), bwd {:.1} ms ({:.2} GMAC/s)",
        fwd * 1e3,
        macs / fwd / 1e9,
        bwd * 1e3,
        2.0 * macs / bwd / 1e9
    );
}

fn main() {
    bench("4->32   16^3 d1", 4, 32, [16, 16, 16], 1, 20);
    bench("32->32  16^3 d1", 32, 32, [16, 16, 16], 1, 10);
    bench("32->64   8^3 d1", 32, 64, [8, 8, 8], 1, 20);
    bench("64->128  4^3 d2", 64, 128, [4, 4, 4], 2, 20);
    bench("64->256  4^3 d3", 64, 256, [4, 4, 4], 3, 20);
    bench("32->32  64^3 d1", 32, 32, [64, 64, 64], 1, 2);
    bench("64->64  32^3 d1", 64, 64, [32, 32, 32], 1, 2);
    bench("64->256 16^3 d3", 64, 256, [16, 16, 16], 3, 2);
}
