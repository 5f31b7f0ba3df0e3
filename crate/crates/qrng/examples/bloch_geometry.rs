//! Bloch-sphere basics: build the three protocol states and an imperfect
//! measurement, evaluate expectations and the randomness parameter C.

use sdi_qrng::bloch::{
    bloch_length_from_noise, expectation, randomness_parameter, state_from_polar, BinaryPovm,
    BlochVector, QubitState, StateTriple,
};

fn main() -> sdi_qrng::Result<()> {
    // a slightly biased, slightly shortened measurement along z
    let povm = BinaryPovm::new(0.48, BlochVector::new(0.02, 0.0, 0.9)?)?;

    // generation state on the equator, test states near the poles with a
    // small misalignment and some modulation noise on the V side
    let misalign = std::f64::consts::PI / 14.0;
    let shrink = bloch_length_from_noise(0.3)?;
    let rho0 = state_from_polar(std::f64::consts::FRAC_PI_2, 0.0, 1.0)?;
    let rho1 = state_from_polar(misalign, 0.0, 1.0)?;
    let rho2 = state_from_polar(std::f64::consts::PI, 0.0, shrink)?;
    let triple = StateTriple::new(rho0, rho1, rho2)?;

    for (name, state) in [("rho0", &triple.rho0), ("rho1", &triple.rho1), ("rho2", &triple.rho2)]
    {
        let b = state.bloch;
        println!(
            "{name}: ({:+.4}, {:+.4}, {:+.4})  |S| = {:.4}  g = {:+.4}",
            b.x,
            b.y,
            b.z,
            b.norm(),
            expectation(&povm, state)?
        );
    }

    let c = randomness_parameter(&povm.t, &triple.rho0.bloch);
    println!("randomness parameter C = |T x S0| = {c:.6}");

    // the same pair after a common rotation gives the same C
    let rotated_t = BlochVector::new(0.9, 0.0, -0.02)?;
    let rotated_s = QubitState::new(BlochVector::new(0.0, 0.0, -1.0)?)?;
    println!(
        "rotated by 90 degrees: C = {:.6}",
        randomness_parameter(&rotated_t, &rotated_s.bloch)
    );
    Ok(())
}
