"""Cross-lingual lexical spaces: Procrustes mapping, contrastive adapters,
interpolation and BLI / word-similarity evaluation."""

from ._lexalign import (
    ConfigError,
    EmbeddingSpace,
    FormatError,
    LexalignError,
    __version__,
    adapt_space,
    bli_evaluate,
    fit_static_to_encoder,
    induce_clwe,
    ingest,
    interpolate_space,
    l2_normalize,
    load_embeddings,
    load_lexicon,
    load_text_embeddings,
    mine_hard_negatives,
    mneg_loss,
    parse_text_embeddings,
    remove_test_leakage,
    run,
    scaled_cosine,
    solve_procrustes,
    spearman,
    topk,
    train,
    write_embedding_cache,
    write_text_embeddings,
    xlsim_evaluate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
