pub mod hereditary;
pub mod maps;
pub mod matching;
pub mod search;
