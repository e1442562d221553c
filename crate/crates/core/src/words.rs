//! Multiset permutations and their continuously increasing subsequences.
//!
//! A [`Word`] over `[n]` with multiplicity `m` uses every value `1..=n`
//! exactly `m` times. The statistics computed here are
//!
//! * `l_start(i)`: the longest subsequence of the form `i (i+1) ... j`,
//! * `l1`: the same with the start fixed at 1,
//! * `l_max`: the maximum over all starts.

use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combin::factorial;
use crate::error::{Error, Result};

/// Default ceiling on the number of words an enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

const MAX_LENGTH: u64 = i32::MAX as u64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<u32>,
    m: u32,
    n: u32,
}

impl Word {
    /// Validates `letters` as an element of `S_{m,n}`.
    pub fn new(letters: Vec<u32>, m: u32, n: u32) -> Result<Self> {
        check_shape(m, n)?;
        let mut counts = vec![0usize; n as usize + 1];
        for &letter in &letters {
            if letter == 0 || letter > n {
                return Err(Error::AlphabetViolation { letter, n });
            }
            counts[letter as usize] += 1;
        }
        if let Some((value, &count)) = counts
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &c)| c != m as usize)
        {
            return Err(Error::MultiplicityViolation {
                value: value as u32,
                count,
                expected: m,
            });
        }
        Ok(Word { letters, m, n })
    }

    /// Parses either a digit string (`"211323"`, only for `n <= 9`) or a
    /// list separated by commas and/or whitespace (`"2,1,1,3,2,3"`).
    pub fn parse(text: &str, m: u32, n: u32) -> Result<Self> {
        let text = text.trim();
        let letters: Vec<u32> = if text.contains(|c: char| c == ',' || c.is_whitespace()) {
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u32>()
                        .map_err(|_| Error::InvalidArgument(format!("bad letter {s:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::InvalidArgument(format!("bad letter {c:?}")))
                })
                .collect::<Result<_>>()?
        };
        Word::new(letters, m, n)
    }

    pub(crate) fn from_parts_unchecked(letters: Vec<u32>, m: u32, n: u32) -> Self {
        debug_assert_eq!(letters.len(), m as usize * n as usize);
        Word { letters, m, n }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Length of the longest subsequence `i (i+1) ... j`.
    ///
    /// Taking the earliest available copy of each successive value is optimal
    /// for a fixed start, so one left-to-right scan suffices.
    pub fn l_start(&self, i: u32) -> u32 {
        l_start_of(&self.letters, i, self.n)
    }

    pub fn l1(&self) -> u32 {
        self.l_start(1)
    }

    /// Longest continuously increasing subsequence over all starting values.
    pub fn l_max(&self) -> u32 {
        l_max_of(&self.letters, self.n)
    }

    /// Whether `pattern` occurs as a (not necessarily contiguous) subsequence.
    pub fn contains_subsequence(&self, pattern: &[u32]) -> bool {
        let mut rest = pattern.iter().peekable();
        for &letter in &self.letters {
            match rest.peek() {
                Some(&&want) if want == letter => {
                    rest.next();
                }
                None => break,
                _ => {}
            }
        }
        rest.peek().is_none()
    }

    /// Length of the longest strictly increasing subsequence.
    pub fn lis(&self) -> u32 {
        lis_of(&self.letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 9 {
            for letter in &self.letters {
                write!(f, "{letter}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

pub(crate) fn l_start_of(letters: &[u32], i: u32, n: u32) -> u32 {
    if i == 0 || i > n {
        return 0;
    }
    let mut target = i;
    for &letter in letters {
        if letter == target {
            if target == n {
                return n - i + 1;
            }
            target += 1;
        }
    }
    target - i
}

pub(crate) fn l_max_of(letters: &[u32], n: u32) -> u32 {
    // best[v]: longest run ending in value v among the letters seen so far.
    let mut best = vec![0u32; n as usize + 1];
    let mut answer = 0;
    for &letter in letters {
        let v = letter as usize;
        let extended = best[v - 1] + 1;
        if extended > best[v] {
            best[v] = extended;
            answer = answer.max(extended);
        }
    }
    answer
}

/// Patience sorting: `tails[k]` is the smallest possible last element of a
/// strictly increasing subsequence of length `k + 1`.
pub(crate) fn lis_of(letters: &[u32]) -> u32 {
    let mut tails: Vec<u32> = Vec::new();
    for &x in letters {
        let pos = tails.partition_point(|&t| t < x);
        if pos == tails.len() {
            tails.push(x);
        } else {
            tails[pos] = x;
        }
    }
    tails.len() as u32
}

pub(crate) fn check_shape(m: u32, n: u32) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "m and n must be positive (m={m}, n={n})"
        )));
    }
    if m as u64 * n as u64 > MAX_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "word length m*n = {} exceeds {MAX_LENGTH}",
            m as u64 * n as u64
        )));
    }
    Ok(())
}

/// Builds and validates a word; see [`Word::new`].
pub fn make_word(letters: &[u32], m: u32, n: u32) -> Result<Word> {
    Word::new(letters.to_vec(), m, n)
}

/// Seed plus stream index. Identical pairs always produce identical streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        RandomSource { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Fills `buf` with a uniformly random element of `S_{m,n}`.
pub(crate) fn fill_uniform<R: rand::Rng + ?Sized>(buf: &mut Vec<u32>, m: u32, n: u32, rng: &mut R) {
    buf.clear();
    buf.reserve(m as usize * n as usize);
    for v in 1..=n {
        buf.extend(std::iter::repeat(v).take(m as usize));
    }
    buf.shuffle(rng);
}

/// Draws a word uniformly from `S_{m,n}`: every word has probability
/// `(m!)^n / (mn)!`.
///
/// # Panics
/// If `m` or `n` is zero, or `m*n` does not fit the letter index range.
pub fn sample_uniform(m: u32, n: u32, source: &RandomSource) -> Word {
    check_shape(m, n).expect("sample_uniform: invalid shape");
    let mut rng = source.rng();
    let mut letters = Vec::new();
    fill_uniform(&mut letters, m, n, &mut rng);
    Word::from_parts_unchecked(letters, m, n)
}

/// `|S_{m,n}| = (mn)! / (m!)^n`.
pub fn multiset_count(m: u32, n: u32) -> BigUint {
    let total = factorial(m as u64 * n as u64);
    let block = factorial(m as u64).pow(n);
    total / block
}

/// Iterates over every word of `S_{m,n}` in lexicographic order.
pub fn enumerate_words(m: u32, n: u32) -> Result<WordIter> {
    enumerate_words_capped(m, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_words_capped(m: u32, n: u32, cap: u64) -> Result<WordIter> {
    check_shape(m, n)?;
    let size = multiset_count(m, n);
    if size > BigUint::from(cap) {
        return Err(Error::SpaceTooLarge {
            size: size.to_string(),
            cap,
        });
    }
    let mut first = Vec::with_capacity(m as usize * n as usize);
    for v in 1..=n {
        first.extend(std::iter::repeat(v).take(m as usize));
    }
    Ok(WordIter {
        next: Some(first),
        m,
        n,
    })
}

pub struct WordIter {
    next: Option<Vec<u32>>,
    m: u32,
    n: u32,
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.next.take()?;
        let mut successor = current.clone();
        if next_permutation(&mut successor) {
            self.next = Some(successor);
        }
        Some(Word::from_parts_unchecked(current, self.m, self.n))
    }
}

/// Advances to the next lexicographic arrangement; false when `xs` was the last.
fn next_permutation(xs: &mut [u32]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Number of words of `S_{m,n}` containing `1 2 ... n`, by enumeration.
pub fn count_complete_bruteforce(m: u32, n: u32) -> Result<BigUint> {
    let count = enumerate_words(m, n)?.filter(|w| w.l1() == n).count();
    Ok(BigUint::from(count))
}
