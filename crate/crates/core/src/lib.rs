pub mod classify;
pub mod graph;
pub mod ids;
pub mod isocanon;
pub mod oracle;
pub mod rewrite;
pub mod format;
pub mod seifert;
pub mod surface;
