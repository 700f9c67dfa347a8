mod common;

use common::{accepted, certificates, tamper, Tamper};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn emitted_certificates_recheck() {
    for (p, cert) in certificates() {
        assert!(accepted(&p, &cert), "{cert}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tampered_certificates_are_rejected(seed in any::<u64>(), which in 0..4usize, kind in 0..3usize) {
        let certs = certificates();
        let (p, cert) = &certs[which];
        let kind = [Tamper::Qualification, Tamper::Rule, Tamper::Theta][kind];
        let mut rng = StdRng::seed_from_u64(seed);
        if let Some(bad) = tamper(p, cert, kind, &mut rng) {
            prop_assert!(!accepted(p, &bad), "{kind:?} accepted:\n{bad}");
        }
    }
}
