from typing import Annotated, Any

import numpy as np
from pydantic import PlainSerializer, PlainValidator


def _readonly_array(value: Any) -> np.ndarray:
    array = np.array(value, copy=True)
    if array.dtype == object:
        raise ValueError("array must be numeric")
    array.setflags(write=False)
    return array


# numpy array field: copied on validation, read-only afterwards, lists in JSON
NDArray = Annotated[
    np.ndarray,
    PlainValidator(_readonly_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
