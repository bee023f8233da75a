"""YAML loading and dumping for configuration and scenario files."""

from enum import Enum
from typing import Any

import numpy as np
import yaml
from pydantic import BaseModel


class WLANYAMLLoader(yaml.SafeLoader):
    """Safe YAML loader used for every input file."""


class WLANYAMLDumper(yaml.SafeDumper):
    """Safe YAML dumper that understands enums, models, tuples and numpy scalars."""


def enum_representer(dumper: WLANYAMLDumper, data: Enum) -> yaml.nodes.Node:
    """Represent an Enum by its value."""
    return dumper.represent_data(data.value)


def model_representer(dumper: WLANYAMLDumper, data: BaseModel) -> yaml.nodes.Node:
    """Represent a pydantic model by its JSON-compatible dict."""
    return dumper.represent_dict(data.model_dump(mode="json", exclude_none=True))


def tuple_representer(dumper: WLANYAMLDumper, data: tuple[Any, ...]) -> yaml.nodes.Node:
    """Represent tuples as plain sequences."""
    return dumper.represent_list(list(data))


def numpy_representer(dumper: WLANYAMLDumper, data: np.generic) -> yaml.nodes.Node:
    """Represent numpy scalars as Python scalars."""
    return dumper.represent_data(data.item())


WLANYAMLDumper.add_multi_representer(Enum, enum_representer)
WLANYAMLDumper.add_multi_representer(BaseModel, model_representer)
WLANYAMLDumper.add_representer(tuple, tuple_representer)
WLANYAMLDumper.add_multi_representer(np.generic, numpy_representer)


def load_yaml(content: str) -> Any:
    """Parse YAML content; an empty document yields an empty mapping."""
    data = yaml.load(content, Loader=WLANYAMLLoader)  # noqa: S506
    return {} if data is None else data


def dump_yaml(data: Any, stream: Any = None, **kwargs: Any) -> str:
    """Dump data to YAML with block style and insertion order preserved.

    Args:
        data: Data to serialize
        stream: Optional stream to write to
        **kwargs: Additional arguments passed to yaml.dump

    Returns:
        YAML string if stream is None
    """
    kwargs.setdefault("Dumper", WLANYAMLDumper)
    kwargs.setdefault("default_flow_style", False)
    kwargs.setdefault("sort_keys", False)
    return yaml.dump(data, stream=stream, **kwargs)  # type: ignore[no-any-return]
