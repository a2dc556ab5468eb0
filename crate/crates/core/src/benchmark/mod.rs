//! MCQ data model: questions, datasets, subspecialties and the three-axis
//! complexity profile, plus line-delimited JSON ingestion.

mod complexity;
mod dataset;
mod medqa;
mod question;
mod subspecialty;

pub use complexity::{composite_score, ComplexityProfile, Dimension, InvalidLevel, Level};
pub use dataset::{load_dataset, parse_dataset, Dataset, DatasetError};
pub use medqa::{adapt_medqa, MedQaError, MedQaRecord};
pub use question::{
    letter_index, option_letter, Question, ValidationProfile, BOARD_OPTIONS, MAX_OPTIONS,
    MIN_OPTIONS,
};
pub use subspecialty::{Subspecialty, UnknownSubspecialty};
