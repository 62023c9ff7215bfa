use exhibit_core::encoder::{TokenSequence, SEQUENCE_LENGTH};
use exhibit_core::neural::{mse_loss, Model, ModelInput, ModelSpec, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;

fn hidden_pattern(model: &Model, input: &ModelInput) -> Vec<bool> {
    // the hidden activations are not exposed, so probe them through a copy
    // whose output layer is the identity over hidden units
    let spec = *model.spec();
    let mut probe_spec = spec;
    probe_spec.output_dim = spec.hidden_dim;
    let layout_len = model.params().len() - (spec.hidden_dim * spec.output_dim + spec.output_dim);
    let mut params = model.params()[..layout_len].to_vec();
    for r in 0..spec.hidden_dim {
        for c in 0..spec.hidden_dim {
            params.push(if r == c { 1.0 } else { 0.0 });
        }
    }
    params.extend(std::iter::repeat(0.0).take(spec.hidden_dim));
    let probe = Model::from_params(probe_spec, params).unwrap();
    probe.forward(input).unwrap().iter().map(|&h| h > 0.0).collect()
}

fn check(variant: Variant, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = match variant {
        Variant::SelfContained => ModelSpec::self_contained(4, 2).with_embed_dim(3).with_hidden(3),
        Variant::EmbedToTags => ModelSpec::embed_to_tags(4, 2).with_hidden(3),
        Variant::EmbedToEmbed => ModelSpec::embed_to_embed(4, 2).with_hidden(3),
    };
    let model = Model::init(spec, seed).unwrap();
    let input = match variant {
        Variant::SelfContained => {
            let mut ids = vec![0u32; SEQUENCE_LENGTH];
            for slot in ids.iter_mut().take(5) {
                *slot = rng.random_range(1..4);
            }
            ModelInput::Tokens(TokenSequence::from_ids(ids).unwrap())
        }
        _ => ModelInput::Dense((0..4).map(|_| rng.random_range(-1.0..1.0)).collect()),
    };
    let target: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, grads) = model.backward(&input, &target).unwrap();
    let mut checked = 0;
    for i in 0..model.params().len() {
        let mut plus = model.clone();
        plus.params_mut()[i] += H;
        let mut minus = model.clone();
        minus.params_mut()[i] -= H;
        if hidden_pattern(&plus, &input) != hidden_pattern(&minus, &input) {
            continue;
        }
        let lp = mse_loss(&plus.forward(&input).unwrap(), &target).unwrap();
        let lm = mse_loss(&minus.forward(&input).unwrap(), &target).unwrap();
        let numeric = (lp - lm) / (2.0 * H);
        let denom = grads[i].abs().max(numeric.abs()).max(1e-7);
        let rel = (grads[i] - numeric).abs() / denom;
        assert!(rel < 1e-4, "{variant:?} seed {seed} param {i}: analytic {} numeric {numeric}", grads[i]);
        checked += 1;
    }
    checked
}

#[test]
fn analytic_gradients_match_central_differences() {
    for variant in Variant::ALL {
        let checked: usize = (0..100).map(|seed| check(variant, seed)).sum();
        assert!(checked > 100 * 10, "{variant:?}: only {checked} components checked");
    }
}
