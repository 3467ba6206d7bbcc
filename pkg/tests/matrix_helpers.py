import numpy as np

from stont.embedding_io import EmbeddingMatrix


def make_matrix(data, ids=None, kind="document", model_name="test"):
    data = np.asarray(data, dtype="f4")
    if ids is None:
        ids = list(range(1, data.shape[0] + 1))
    return EmbeddingMatrix(kind=kind, ids=ids, data=data, model_name=model_name)
