//! Cosmetic robot names such as "Pushwalker Botson".

use std::collections::HashSet;

use rand::{Rng, RngCore};

const FIRST_HEADS: &[&str] = &[
    "Push", "Gear", "Bolt", "Spark", "Crank", "Rivet", "Servo", "Flux", "Cog", "Sprocket", "Widget",
    "Piston", "Chrome", "Zap", "Lug", "Dyna",
];
const FIRST_TAILS: &[&str] = &[
    "walker", "grinder", "spinner", "hopper", "stomper", "lifter", "tinker", "roller", "whirr",
    "clank", "beam", "wright",
];
const LAST_HEADS: &[&str] = &[
    "Bot", "Mech", "Droid", "Tron", "Volt", "Circuit", "Steel", "Iron", "Copper", "Magnet", "Byte",
    "Axle",
];
const LAST_TAILS: &[&str] = &["son", "ley", "worth", "ington", "berg", "stein", "ton", "ford", "ski", "ov"];

fn pick<'a, R: RngCore>(rng: &mut R, list: &[&'a str]) -> &'a str {
    list[rng.random_range(0..list.len())]
}

/// Draws `n` distinct two-word names. Falls back to a numbered suffix if
/// the syllable space runs dry.
pub fn gen_names<R: RngCore>(rng: &mut R, n: usize) -> Vec<String> {
    let mut seen = HashSet::with_capacity(n);
    (0..n)
        .map(|i| {
            for _ in 0..32 {
                let name = format!(
                    "{}{} {}{}",
                    pick(rng, FIRST_HEADS),
                    pick(rng, FIRST_TAILS),
                    pick(rng, LAST_HEADS),
                    pick(rng, LAST_TAILS)
                );
                if seen.insert(name.clone()) {
                    return name;
                }
            }
            let name = format!("Unit {i}");
            seen.insert(name.clone());
            name
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn names_are_unique_and_two_words() {
        let names = gen_names(&mut stream_rng(1, Stream::Names), 100);
        let unique: HashSet<_> = names.iter().collect();
        assert_eq!(unique.len(), 100);
        assert!(names.iter().all(|n| n.split(' ').count() == 2));
    }
}
