#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/facts.md")]
mod facts {}
#[doc = include_str!("../../../book/src/algebra.md")]
mod algebra {}
#[doc = include_str!("../../../book/src/sampling.md")]
mod sampling {}
#[doc = include_str!("../../../book/src/generation.md")]
mod generation {}
#[doc = include_str!("../../../book/src/paraphrase.md")]
mod paraphrase {}
#[doc = include_str!("../../../book/src/evaluation.md")]
mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
