//! Regenerates the bundled attack-toy assets deterministically.
//!
//! Usage: `cargo run -p zofw --example gen_attack_assets -- <out-dir>`
//! The repository ships the output of seed 7 with 3 classes, 64 pixels,
//! and 25 correctly classified class-0 target images.

use std::fmt::Write as _;
use zofw::numerics::GaussianSampler;
use zofw::objectives::{synth_attack_toy, write_attack_model};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "assets".into());
    let mut sampler = GaussianSampler::new(7);
    let (model, images, labels) = synth_attack_toy(&mut sampler, 3, 64, 25);

    std::fs::create_dir_all(&out).expect("create output dir");
    std::fs::write(format!("{out}/attack_toy_model.txt"), write_attack_model(&model)).expect("write model");

    let mut text = String::new();
    for (img, label) in images.iter().zip(&labels) {
        write!(text, "{label}").unwrap();
        for (i, v) in img.as_slice().iter().enumerate() {
            write!(text, " {}:{}", i + 1, v).unwrap();
        }
        text.push('\n');
    }
    std::fs::write(format!("{out}/attack_toy_images.txt"), text).expect("write images");
    println!("wrote attack toy assets to {out}/");
}
