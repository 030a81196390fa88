//! Robot-versus-educator dose comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::SessionEvent;
use crate::morphology::{dose_report_over, DoseReport, Lexicon, MorphError, MorphTarget};
use crate::replay::log_dose_report;
use crate::transcript::SpeakerTranscript;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error("robot log has no speech")]
    EmptyRobotLog,
    #[error("educator transcript has no utterances by '{0}'")]
    NoSpeakerUtterances(String),
    #[error(transparent)]
    Morph(#[from] MorphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub target: String,
    pub speaker: String,
    pub robot: DoseReport,
    pub educator: DoseReport,
    /// Robot per-minute rate over educator per-minute rate; absent when the
    /// educator rate is zero or undefined.
    pub rate_ratio: Option<f64>,
}

/// Both sides are measured with the same target and lexicon. The educator
/// side counts only `speaker`'s utterances over the whole transcript
/// duration.
pub fn compare_dose(
    robot_log: &[SessionEvent],
    educator: &SpeakerTranscript,
    speaker: &str,
    target: &MorphTarget,
    lexicon: &Lexicon,
) -> Result<ComparisonReport, CompareError> {
    let robot = log_dose_report(robot_log, target, lexicon)?;
    if robot.per_utterance.is_empty() {
        return Err(CompareError::EmptyRobotLog);
    }
    let utterances = educator.utterances_by(speaker);
    if utterances.is_empty() {
        return Err(CompareError::NoSpeakerUtterances(speaker.to_string()));
    }
    let educator = dose_report_over(&utterances, educator.duration_s() * 1000, target, lexicon)?;
    let rate_ratio = match (robot.rate_per_min, educator.rate_per_min) {
        (Some(r), Some(e)) if e > 0.0 => Some(r / e),
        _ => None,
    };
    Ok(ComparisonReport { target: target.id.clone(), speaker: speaker.to_string(), robot, educator, rate_ratio })
}
