use quartic_sos::quartic::{expand_squares, QuadraticForm, TernaryQuartic};
use quartic_sos::{sos_representation, verify, SdpOptions, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sos(rng: &mut ChaCha8Rng, k: usize) -> TernaryQuartic {
    let qs: Vec<QuadraticForm> =
        (0..k).map(|_| QuadraticForm::new(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))).collect();
    expand_squares(&qs)
}

fn scaled(p: &TernaryQuartic, s: f64) -> TernaryQuartic {
    TernaryQuartic::from_coeffs(p.coeffs().map(|c| c * s))
}

#[test]
fn reports_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = SdpOptions { seed: 3, ..SdpOptions::default() };
    for _ in 0..5 {
        let p = random_sos(&mut rng, 4);
        let a = serde_json::to_string(&sos_representation(&p, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&sos_representation(&p, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn certificates_survive_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let opts = SdpOptions::default();
    for s in [1e-4, 1.0, 1e4] {
        let p = scaled(&random_sos(&mut rng, 3), s);
        let r = sos_representation(&p, &opts).unwrap();
        assert!(matches!(r.verdict, Verdict::Sos(n) if n <= 6), "{:?}", r.verdict);
        let cert = r.certificate.unwrap();
        let v = verify(&p, &cert, 1e-6);
        assert!(v.pass, "scale {s}: gap {:.3e}", v.gap);
    }
}

#[test]
fn rescaled_negative_quartic_still_yields_witness() {
    let p: TernaryQuartic = serde_json::from_str(r#"{"p":{"400":1,"220":-3,"040":1,"004":1}}"#).unwrap();
    for s in [1e-3, 1e3] {
        let q = scaled(&p, s);
        let r = sos_representation(&q, &SdpOptions::default()).unwrap();
        let Verdict::NotNonnegative(w) = r.verdict else { panic!("expected witness, got {:?}", r.verdict) };
        assert!(q.evaluate(w[0], w[1], w[2]) < 0.0);
    }
}

#[test]
fn tampered_certificate_fails_verification() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = random_sos(&mut rng, 2);
    let mut cert = sos_representation(&p, &SdpOptions::default()).unwrap().certificate.unwrap();
    cert.squares[0].q[0] += 0.1;
    assert!(!verify(&p, &cert, 1e-6).pass);
}
