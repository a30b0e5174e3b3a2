use subfrac::bernstein::BernsteinSpec;
use subfrac::estimates::{ratio_sweep, EnvelopeFamily, EnvelopeSpec};
use subfrac::kernels::{HeatKernelSpec, ScaleFunction, VolumeFunction};
use subfrac::montecarlo::{ks_statistic, sample_subordinator, SamplerConfig};
use subfrac::solutions::{kernel_field, q_kernel, Quantity};
use subfrac::subordinator::DensityEval;

#[test]
fn json_specs_drive_a_kernel_field() {
    let spec: BernsteinSpec = serde_json::from_str(r#"{"kind":"stable","beta":0.5}"#).unwrap();
    let kernel: HeatKernelSpec = serde_json::from_str(r#"{"kind":"cauchy"}"#).unwrap();
    let e = DensityEval::auto(spec);
    let f = kernel_field(Quantity::P, &kernel, &e, &[0.5, 2.0], &[0.5, 1.0, 4.0]).unwrap();
    assert_eq!(f.values.len(), 6);
    // p decreases in z at fixed t
    for i in 0..2 {
        assert!(f.value(i, 0) > f.value(i, 1) && f.value(i, 1) > f.value(i, 2));
    }
}

#[test]
fn general_jump_envelope_bands_the_mixture_q() {
    let spec = BernsteinSpec::mixture(vec![(0.5, 0.3), (0.5, 0.7)]).unwrap();
    let e = DensityEval::auto(spec.clone());
    let k = HeatKernelSpec::cauchy();
    let env = EnvelopeSpec::new(EnvelopeFamily::GeneralJump {
        scale: ScaleFunction::Power(1.0),
        volume: VolumeFunction::Power(1.0),
        phi: spec,
    })
    .unwrap();
    let rep = ratio_sweep(
        |t, z| Ok(q_kernel(&k, &e, t, z)?.value),
        &env,
        &[0.1, 1.0, 10.0],
        &[0.1, 1.0, 10.0, 100.0],
    )
    .unwrap();
    assert!(rep.band_width() < 50.0, "{}", rep.render());
}

#[test]
fn sampler_agrees_with_subordinator_cdf_for_a_scaled_law() {
    let c = SamplerConfig::new(0.6, 5_000, 42).unwrap().with_scale(2.0);
    let e = DensityEval::auto(BernsteinSpec::stable(0.6).unwrap().scaled(2.0));
    let x = sample_subordinator(&c, 0.5).unwrap();
    let ks = ks_statistic(&x, |t| Ok(e.cdf_pair(0.5, t)?.0)).unwrap();
    assert!(ks < 0.03, "{ks}");
}
