//! The partial feedback guessing game.
//!
//! A deck holding `m` copies of each card type `1..=n` is shuffled into a word
//! `π ∈ S_{m,n}`. Each round the player names a card type, the top card is
//! revealed only as "correct" or "incorrect", and the score is the number of
//! correct guesses.

use crate::error::Result;
use crate::montecarlo::{Estimate, MonteCarlo};
use crate::words::{fill_uniform, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Always guess 1; scores exactly `m`.
    Trivial,
    /// Guess `v` until all `m` copies of `v` were guessed correctly, then `v + 1`.
    Safe,
    /// Guess `v` until one correct guess, then `v + 1`. Stays on `n` at the end.
    Shifting,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Trivial, StrategyKind::Safe, StrategyKind::Shifting];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Trivial => "trivial",
            StrategyKind::Safe => "safe",
            StrategyKind::Shifting => "shifting",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown strategy `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTrace {
    pub word: Word,
    pub guesses: Vec<u32>,
    pub feedback: Vec<bool>,
    pub score: u32,
}

impl GameTrace {
    /// Whether some correct guess named card type `n`.
    pub fn guessed_last_type(&self) -> bool {
        let n = self.word.n();
        self.guesses.iter().zip(&self.feedback).any(|(&g, &ok)| ok && g == n)
    }
}

/// Score only, without recording the trace.
fn score(letters: &[u32], m: u32, n: u32, strategy: StrategyKind) -> u32 {
    let mut play = Player::new(m, n, strategy);
    letters.iter().filter(|&&card| play.round(card).1).count() as u32
}

struct Player {
    m: u32,
    n: u32,
    strategy: StrategyKind,
    current: u32,
    hits_on_current: u32,
}

impl Player {
    fn new(m: u32, n: u32, strategy: StrategyKind) -> Self {
        Player {
            m,
            n,
            strategy,
            current: 1,
            hits_on_current: 0,
        }
    }

    /// Returns the guess and whether it was correct.
    fn round(&mut self, card: u32) -> (u32, bool) {
        let guess = self.current;
        let hit = guess == card;
        if hit {
            self.hits_on_current += 1;
            let advance = match self.strategy {
                StrategyKind::Trivial => false,
                StrategyKind::Safe => self.hits_on_current == self.m,
                StrategyKind::Shifting => true,
            };
            if advance && self.current < self.n {
                self.current += 1;
                self.hits_on_current = 0;
            }
        }
        (guess, hit)
    }
}

pub fn play(word: &Word, strategy: StrategyKind) -> GameTrace {
    let mut player = Player::new(word.m(), word.n(), strategy);
    let (guesses, feedback): (Vec<u32>, Vec<bool>) =
        word.letters().iter().map(|&card| player.round(card)).unzip();
    let score = feedback.iter().filter(|&&ok| ok).count() as u32;
    GameTrace {
        word: word.clone(),
        guesses,
        feedback,
        score,
    }
}

/// Mean score over uniformly shuffled decks. Trial `i` plays the same deck as
/// trial `i` of the Monte Carlo estimators with the same seed.
pub fn expected_score(m: u32, n: u32, strategy: StrategyKind, trials: u64, seed: u64) -> Result<Estimate> {
    expected_score_with(&MonteCarlo::new(trials, seed), m, n, strategy)
}

pub fn expected_score_with(mc: &MonteCarlo, m: u32, n: u32, strategy: StrategyKind) -> Result<Estimate> {
    mc.validate(m, n)?;
    let h = mc.histogram(0, |rng, buf| {
        fill_uniform(buf, m, n, rng);
        score(buf, m, n, strategy)
    });
    Ok(Estimate::from_histogram(&h, mc.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{sample_uniform, RandomSource};

    #[test]
    fn shifting_example() {
        let w = Word::parse("211323", 2, 3).unwrap();
        let t = play(&w, StrategyKind::Shifting);
        assert_eq!(t.guesses, vec![1, 1, 2, 2, 2, 3]);
        assert_eq!(t.feedback, vec![false, true, false, false, true, true]);
        assert_eq!(t.score, 3);
        assert_eq!(t.score, w.l1());
    }

    #[test]
    fn safe_example() {
        let w = Word::parse("112233", 2, 3).unwrap();
        assert_eq!(play(&w, StrategyKind::Safe).score, 6);
        assert_eq!(play(&w, StrategyKind::Shifting).score, 4);
        let w = Word::parse("332211", 2, 3).unwrap();
        assert_eq!(play(&w, StrategyKind::Safe).score, 2);
    }

    #[test]
    fn strategy_invariants_on_samples() {
        for (m, n) in [(1, 5), (2, 6), (3, 4), (4, 10)] {
            for s in 0..300 {
                let w = sample_uniform(m, n, &RandomSource::new(17, s));
                let trivial = play(&w, StrategyKind::Trivial);
                assert_eq!(trivial.score, m);
                let shift = play(&w, StrategyKind::Shifting);
                assert!(shift.score >= w.l1());
                if !shift.guessed_last_type() {
                    assert_eq!(shift.score, w.l1());
                }
                for kind in StrategyKind::ALL {
                    let t = play(&w, kind);
                    assert_eq!(t.guesses.len(), (m * n) as usize);
                    assert_eq!(t.feedback.len(), t.guesses.len());
                    assert_eq!(t.score as usize, t.feedback.iter().filter(|&&b| b).count());
                    assert_eq!(t.score, score(w.letters(), m, n, kind));
                }
            }
        }
    }

    #[test]
    fn trivial_expectation_is_exact() {
        let e = expected_score(3, 7, StrategyKind::Trivial, 100, 1).unwrap();
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn shifting_dominates_trivial() {
        let a = expected_score(2, 10, StrategyKind::Shifting, 2000, 4).unwrap();
        let b = expected_score(2, 10, StrategyKind::Trivial, 2000, 4).unwrap();
        assert!(a.mean >= b.mean);
    }

    #[test]
    fn parse_strategy() {
        assert_eq!("safe".parse::<StrategyKind>().unwrap(), StrategyKind::Safe);
        assert!("greedy".parse::<StrategyKind>().is_err());
    }
}
