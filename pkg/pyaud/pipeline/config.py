# encoding: utf-8
import hashlib
import logging
import math
from collections import OrderedDict

from pyaud.errors import ConfigError
from pyaud.frontend.features import FrontendConfig
from pyaud.graph import ClusterConfig
from pyaud.pipeline.definition import PipelineDefinition
from pyaud.section import ConfigSection, to_float_tuple, to_int_tuple
from pyaud.segmenter import SegmenterConfig

__all__ = ["HmmConfig", "TrainingConfig", "PipelineConfig"]

logger = logging.getLogger(__name__)


class HmmConfig(ConfigSection):
    name = "hmm"
    defaults = {
        "n_states": 3,
        "fractions": (0.2, 0.6, 0.2),
        "variance_floor_scale": 1e-3,
        "transition_floor": 0.01,
        "insertion_penalty": 0.0,
        "sequencing": False,
        "max_components": 4,
        "mixup_at": (),
    }
    types = {"fractions": to_float_tuple, "mixup_at": to_int_tuple}

    def validate(self):
        if self.n_states < 1:
            raise ConfigError("n_states must be at least 1.")
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ConfigError("fractions needs three non-negative values.")
        if sum(self.fractions) <= 0:
            raise ConfigError("fractions must not all be zero.")
        if not 0 < self.transition_floor < 0.5:
            raise ConfigError("transition_floor must be in (0, 0.5).")
        if self.variance_floor_scale <= 0:
            raise ConfigError("variance_floor_scale must be positive.")
        if self.max_components < 1:
            raise ConfigError("max_components must be at least 1.")


class TrainingConfig(ConfigSection):
    name = "training"
    defaults = {
        "stage1_max_iter": 15,
        "stage2_max_iter": 10,
        "rel_ll_tol": 1e-4,
        "merge_target": 40,
        "merge_stratified": True,
        "seed": 0,
        "n_jobs": 1,
        "exemplar_sample": 50,
        "crossfade": 0.01,
    }

    def validate(self):
        if self.stage1_max_iter < 1 or self.stage2_max_iter < 1:
            raise ConfigError("Iteration counts must be at least 1.")
        if not self.rel_ll_tol > 0 or math.isnan(self.rel_ll_tol):
            raise ConfigError("rel_ll_tol must be positive.")
        if self.merge_target < 1:
            raise ConfigError("merge_target must be at least 1.")
        if self.exemplar_sample < 1:
            raise ConfigError("exemplar_sample must be at least 1.")
        if self.crossfade < 0:
            raise ConfigError("crossfade must not be negative.")


class PipelineConfig(object):
    """All sections of a pipeline run."""

    SECTIONS = OrderedDict(
        (cls.name, cls)
        for cls in (FrontendConfig, SegmenterConfig, ClusterConfig, HmmConfig, TrainingConfig)
    )

    def __init__(self, **sections):
        super(PipelineConfig, self).__init__()
        for name, cls in self.SECTIONS.items():
            section = sections.pop(name, None)
            if section is None:
                section = cls()
            elif not isinstance(section, cls):
                raise ConfigError("Section {0} must be a {1}.".format(name, cls.__name__))
            setattr(self, name, section)
        if sections:
            raise ConfigError("Unknown sections: {0}".format(", ".join(sorted(sections))))

    # shortcuts for the most used tunables
    @property
    def knn_k(self):
        return self.cluster.knn_k

    @property
    def min_cluster_size(self):
        return self.cluster.min_cluster_size

    @property
    def seed(self):
        return self.training.seed

    def sections(self):
        return [getattr(self, name) for name in self.SECTIONS]

    def replace(self, **changes):
        """Copy with "section.property" changes, e.g. replace(**{"training.seed": 3})."""
        grouped = OrderedDict()
        for key, value in changes.items():
            section, _, pname = key.partition(".")
            if section not in self.SECTIONS or not pname:
                raise ConfigError("Unknown config key: {0}".format(key))
            grouped.setdefault(section, {})[pname] = value
        sections = {}
        for name in self.SECTIONS:
            sections[name] = getattr(self, name).copy(**grouped.get(name, {}))
        return PipelineConfig(**sections)

    def to_definition(self):
        defn = PipelineDefinition()
        for section in self.sections():
            defn.set_section(section.name, section.to_strings())
        return defn

    @classmethod
    def from_definition(cls, defn):
        sections = {}
        for name in defn.section_names():
            if name not in cls.SECTIONS:
                logger.warning("Ignoring unknown section '%s'.", name)
                continue
            sections[name] = cls.SECTIONS[name].from_strings(defn.get_section(name))
        return cls(**sections)

    @classmethod
    def load(cls, path):
        defn = PipelineDefinition()
        defn.load_file(path)
        return cls.from_definition(defn)

    def save(self, path):
        self.to_definition().save(path)

    def config_hash(self):
        return hashlib.sha256(str(self.to_definition()).encode("utf-8")).hexdigest()

    def __eq__(self, other):
        return isinstance(other, PipelineConfig) and self.sections() == other.sections()

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "<PipelineConfig {0}>".format(self.config_hash()[:12])
