from .checkpoint import fingerprint, load_checkpoint, save_checkpoint
from .model import ArchSpec, ModelParams, cosine_score, embed, embed_backward, init_params, shape_chain
