from .loss import (
    DIFFERENT_BOTH, PAIR_TYPE_NAMES, POSITIVE, SAME_PHRASE, SAME_SPEAKER,
    LossConfig, LossDiagnostics, SimilarityMatrix, batch_pair_types, hnm_triplet_loss,
    hnm_triplet_loss_backward, loss_and_embedding_grads, similarity_matrix,
)
