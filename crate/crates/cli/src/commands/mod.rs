pub mod ablation;
pub mod chain;
pub mod evaluate;
pub mod gen_data;
pub mod lambert_baseline;
pub mod misjudged;
pub mod scale_study;
pub mod sweep;
pub mod train;
