use hermitian_core::census::reconstruct_hermitian;
use hermitian_core::hermitian::standard_form;
use hermitian_core::sections::section_survey;
use hermitian_core::{Elem, Field, ProjTransform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn round_trips(q: u64, seeds: u64) {
    let f = Field::registry(q).unwrap();
    let h = standard_form(&f, 4).unwrap();
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let t = ProjTransform::random(&f, 3, &mut rng);
        let c = Elem(1 + seed as u32 % (f.q() - 1));
        let s = h.linear_substitute(&t).scale(c);
        let (u, a) = reconstruct_hermitian(&s).unwrap().expect("extremal surface not reconstructed");
        assert!(a.is_nonsingular(), "seed {seed}");
        assert!(a.to_polynomial().scalar_equal(&s.linear_substitute(&u)), "seed {seed}");
        // u undoes t up to a unitary change of coordinates
        assert!(h.linear_substitute(&t.compose(&u)).scalar_equal(&a.to_polynomial()));
    }
}

#[test]
fn q4_round_trips() {
    round_trips(4, 100);
}

#[test]
fn q9_round_trips() {
    round_trips(9, 25);
}

#[test]
fn transported_surfaces_keep_their_tallies() {
    let f = Field::registry(9).unwrap();
    let h = standard_form(&f, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = ProjTransform::random(&f, 3, &mut rng);
    assert_eq!(section_survey(&h.linear_substitute(&t)).unwrap().tallies(), (280, 540, 0));
}

#[test]
fn non_extremal_inputs_are_declined() {
    let f = Field::registry(4).unwrap();
    let cases = ["X0^3+X1^3+X2^3", "X0^3+X1^3+X2^3+X3^2*X0", "X0*X1*X2+X3^3", "X0^2+X1^2+X2^2+X3^2"];
    for text in cases {
        let s = hermitian_core::HomPoly::parse(&f, text, Some(4)).unwrap();
        assert_eq!(reconstruct_hermitian(&s).unwrap(), None, "{text}");
    }
}
