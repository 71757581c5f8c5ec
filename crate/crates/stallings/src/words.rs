//! Free-group word arithmetic over a finite ranked alphabet.
//!
//! Elements of F(X) are kept freely reduced at all times: every constructor
//! reduces eagerly, so no `Word` ever contains an adjacent letter/inverse
//! pair.
//!
//! Text encoding: lowercase `a`..`z` denote the generators x_1..x_26 and the
//! corresponding uppercase letter denotes the inverse, so `"aB"` reads as
//! x_1 x_2^{-1}.

use std::fmt;

use thiserror::Error;

/// Largest alphabet rank representable in the one-character text encoding.
pub const MAX_RANK: u8 = 26;

/// Errors from word construction and parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet rank must be between 1 and {MAX_RANK}, got {0}")]
    InvalidRank(usize),
    #[error("letter index {index} out of range for alphabet of rank {rank}")]
    LetterOutOfRange { index: u8, rank: u8 },
    #[error("character '{ch}' at column {column} is not a letter")]
    NotALetter { ch: char, column: usize },
    #[error("letter '{ch}' at column {column} exceeds alphabet rank {rank}")]
    LetterBeyondRank { ch: char, column: usize, rank: u8 },
    #[error("alphabet mismatch: rank {left} vs rank {right}")]
    AlphabetMismatch { left: u8, right: u8 },
}

/// Alphabet of a free group; the generators are numbered 1..=rank.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Alphabet {
    rank: u8,
}

impl Alphabet {
    /// An alphabet with generators x_1..x_rank. The rank is capped at
    /// [`MAX_RANK`] so every letter has a one-character text form.
    pub fn new(rank: usize) -> Result<Self, WordError> {
        if rank == 0 || rank > MAX_RANK as usize {
            return Err(WordError::InvalidRank(rank));
        }
        Ok(Alphabet { rank: rank as u8 })
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    /// Generator indices 1..=rank.
    pub fn letters(&self) -> impl Iterator<Item = u8> {
        1..=self.rank
    }

    pub fn contains(&self, index: u8) -> bool {
        index >= 1 && index <= self.rank
    }

    /// Display name of a generator index, e.g. 1 -> "a".
    pub fn letter_name(&self, index: u8) -> char {
        (b'a' + index - 1) as char
    }
}

/// A generator or its inverse: x_index^{+1} or x_index^{-1}.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SignedLetter {
    index: u8,
    positive: bool,
}

impl SignedLetter {
    pub fn positive(index: u8) -> Self {
        SignedLetter { index, positive: true }
    }

    pub fn negative(index: u8) -> Self {
        SignedLetter { index, positive: false }
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn inverse(self) -> Self {
        SignedLetter { index: self.index, positive: !self.positive }
    }

    /// True when `self` and `other` are adjacent-cancelling, i.e. one is the
    /// inverse of the other.
    pub fn cancels(&self, other: &SignedLetter) -> bool {
        self.index == other.index && self.positive != other.positive
    }

    pub fn to_char(self) -> char {
        let base = if self.positive { b'a' } else { b'A' };
        (base + self.index - 1) as char
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(SignedLetter::positive(c as u8 - b'a' + 1)),
            'A'..='Z' => Some(SignedLetter::negative(c as u8 - b'A' + 1)),
            _ => None,
        }
    }
}

/// A freely reduced word: an element of the free group over its alphabet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Word {
    alphabet: Alphabet,
    letters: Vec<SignedLetter>,
}

impl Word {
    /// The identity element.
    pub fn empty(alphabet: Alphabet) -> Self {
        Word { alphabet, letters: Vec::new() }
    }

    /// Freely reduce a raw letter sequence. This is the canonical
    /// constructor: the result is the unique reduced form of the input.
    pub fn reduce(
        alphabet: Alphabet,
        raw: impl IntoIterator<Item = SignedLetter>,
    ) -> Result<Self, WordError> {
        let mut letters: Vec<SignedLetter> = Vec::new();
        for l in raw {
            if !alphabet.contains(l.index()) {
                return Err(WordError::LetterOutOfRange { index: l.index(), rank: alphabet.rank() });
            }
            match letters.last() {
                Some(top) if top.cancels(&l) => {
                    letters.pop();
                }
                _ => letters.push(l),
            }
        }
        Ok(Word { alphabet, letters })
    }

    /// Parse the one-character-per-letter text form. Column numbers in
    /// errors are 1-based.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self, WordError> {
        let mut raw = Vec::with_capacity(text.len());
        for (i, ch) in text.chars().enumerate() {
            let letter = SignedLetter::from_char(ch)
                .ok_or(WordError::NotALetter { ch, column: i + 1 })?;
            if !alphabet.contains(letter.index()) {
                return Err(WordError::LetterBeyondRank { ch, column: i + 1, rank: alphabet.rank() });
            }
            raw.push(letter);
        }
        Word::reduce(alphabet, raw)
    }

    /// Construct from letters already known to be reduced.
    pub(crate) fn from_reduced(alphabet: Alphabet, letters: Vec<SignedLetter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| !w[0].cancels(&w[1])));
        debug_assert!(letters.iter().all(|l| alphabet.contains(l.index())));
        Word { alphabet, letters }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letters(&self) -> &[SignedLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The group inverse: reversed sequence with all signs flipped.
    pub fn invert(&self) -> Word {
        let letters = self.letters.iter().rev().map(|l| l.inverse()).collect();
        Word::from_reduced(self.alphabet, letters)
    }

    /// Freely reduced concatenation.
    pub fn concat(&self, other: &Word) -> Result<Word, WordError> {
        if self.alphabet != other.alphabet {
            return Err(WordError::AlphabetMismatch {
                left: self.alphabet.rank(),
                right: other.alphabet.rank(),
            });
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            match letters.last() {
                Some(top) if top.cancels(&l) => {
                    letters.pop();
                }
                _ => letters.push(l),
            }
        }
        Ok(Word { alphabet: self.alphabet, letters })
    }

    /// True iff every letter is a plain generator. The empty word counts as
    /// positive.
    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| l.is_positive())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}
