use pou_core::noise::RngStream;
use pou_core::transport::*;
use nalgebra::DVector;

fn main() {
    let mut s = RngStream::new(0, 5);
    let mut rand_measure = |n: usize, d: usize, scale: f64| {
        let pts: Vec<DVector<f64>> = (0..n)
            .map(|_| DVector::from_fn(d, |_, _| scale * s.next_open01()))
            .collect();
        EmpiricalMeasure::uniform(pts).unwrap()
    };
    for inst in 0..10 {
        let a = rand_measure(5, 2, 2.0);
        let b = rand_measure(5, 2, 2.0);
        let cab = cost_matrix(&a, &b).unwrap();
        let cba = cab.transpose();
        let p1 = sinkhorn(a.weights(), b.weights(), &cab, 50.0, 500_000, 1e-12).unwrap();
        let p2 = sinkhorn(b.weights(), a.weights(), &cba, 50.0, 500_000, 1e-12).unwrap();
        println!(
            "inst {inst}: v1={:.12} v2={:.12} |d|={:.2e} conv=({},{}) iters=({},{}) err=({:.1e},{:.1e})",
            p1.value, p2.value, (p1.value - p2.value).abs(),
            p1.converged, p2.converged, p1.iterations, p2.iterations,
            p1.marginal_error, p2.marginal_error
        );
    }
}
