use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The seven emotion categories. Numeric codes 0–6 follow declaration order
/// and index confusion-matrix rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmotionLabel {
    Anger = 0,
    Disgust = 1,
    Fear = 2,
    Happiness = 3,
    Surprise = 4,
    Sadness = 5,
    Neutral = 6,
}

pub const NUM_EMOTIONS: usize = 7;

impl EmotionLabel {
    pub const ALL: [EmotionLabel; NUM_EMOTIONS] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Happiness,
        EmotionLabel::Surprise,
        EmotionLabel::Sadness,
        EmotionLabel::Neutral,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Happiness => "happiness",
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Neutral => "neutral",
        }
    }

    /// Maps a dataset token (case-insensitive) to a label, accepting the
    /// short forms used in TESS file names.
    pub fn from_token(token: &str) -> Option<Self> {
        Some(match token.to_ascii_lowercase().as_str() {
            "anger" | "angry" => EmotionLabel::Anger,
            "disgust" => EmotionLabel::Disgust,
            "fear" => EmotionLabel::Fear,
            "happiness" | "happy" => EmotionLabel::Happiness,
            "surprise" | "ps" | "pleasant_surprise" | "pleasant_surprised" => EmotionLabel::Surprise,
            "sadness" | "sad" => EmotionLabel::Sadness,
            "neutral" => EmotionLabel::Neutral,
            _ => return None,
        })
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_token(s).ok_or_else(|| Error::UnrecognizedLabel {
            token: s.to_string(),
            path: String::new(),
        })
    }
}

/// Reads the emotion from a TESS-style file name: the last
/// underscore-delimited token of the stem (`OAF_back_angry.wav`), or the
/// two-token `pleasant_surprise` suffix.
pub fn label_from_path(path: impl AsRef<Path>) -> Result<EmotionLabel> {
    let path = path.as_ref();
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    let lower = stem.to_ascii_lowercase();
    if lower.ends_with("pleasant_surprise") || lower.ends_with("pleasant_surprised") {
        return Ok(EmotionLabel::Surprise);
    }
    let token = stem.rsplit('_').next().unwrap_or_default();
    EmotionLabel::from_token(token).ok_or_else(|| Error::UnrecognizedLabel {
        token: token.to_string(),
        path: path.display().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_stable() {
        for (i, l) in EmotionLabel::ALL.iter().enumerate() {
            assert_eq!(l.code(), i);
            assert_eq!(EmotionLabel::from_code(i), Some(*l));
        }
        assert_eq!(EmotionLabel::from_code(7), None);
    }

    #[test]
    fn tess_file_names() {
        assert_eq!(label_from_path("OAF_back_angry.wav").unwrap(), EmotionLabel::Anger);
        assert_eq!(label_from_path("YAF_dog_ps.wav").unwrap(), EmotionLabel::Surprise);
        assert_eq!(label_from_path("data/YAF_Pleasant_surprise.wav").unwrap(), EmotionLabel::Surprise);
        assert_eq!(label_from_path("OA_bite_Neutral.WAV").unwrap(), EmotionLabel::Neutral);
        assert_eq!(label_from_path("x/YAF_wife_sad.wav").unwrap(), EmotionLabel::Sadness);
        assert_eq!(label_from_path("OAF_jar_happy.wav").unwrap(), EmotionLabel::Happiness);
    }

    #[test]
    fn unknown_token_is_reported() {
        match label_from_path("clip_01.wav") {
            Err(Error::UnrecognizedLabel { token, .. }) => assert_eq!(token, "01"),
            other => panic!("{other:?}"),
        }
    }
}
