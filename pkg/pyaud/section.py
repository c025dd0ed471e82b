# encoding: utf-8
import logging
import math

from pyaud.errors import ConfigError

__all__ = ["ConfigSection", "to_bool", "to_float_tuple", "to_int_tuple"]

logger = logging.getLogger(__name__)


def to_bool(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError("Not a boolean: {0!r}".format(value))


def _to_tuple(value, itemtype):
    if isinstance(value, str):
        text = value.strip().strip("()[]")
        if not text:
            return tuple()
        return tuple(itemtype(v) for v in text.split(","))
    return tuple(itemtype(v) for v in value)


def to_float_tuple(value):
    return _to_tuple(value, float)


def to_int_tuple(value):
    return _to_tuple(value, int)


def _to_int(value):
    if isinstance(value, str):
        value = value.strip()
    fvalue = float(value)
    if not fvalue.is_integer():
        raise ValueError("Not an integer: {0!r}".format(value))
    return int(fvalue)


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


class ConfigSection(object):
    """A named group of typed tunables with defaults.

    Subclasses declare ``name`` and ``defaults``. The type of every
    property is taken from ``types`` when present, otherwise from the
    type of its default value. Values given as strings (as read from a
    definition file) are coerced.
    """

    name = None
    defaults = {}
    types = {}

    def __init__(self, **properties):
        super(ConfigSection, self).__init__()
        self.apply_defaults()
        for pname, value in properties.items():
            self.set(pname, value)
        self.validate()

    def apply_defaults(self):
        for pname, value in self.defaults.items():
            setattr(self, pname, value)

    def _coercer(self, pname):
        if pname in self.types:
            return self.types[pname]
        default = self.defaults[pname]
        if isinstance(default, bool):
            return to_bool
        if isinstance(default, int):
            return _to_int
        if isinstance(default, float):
            return float
        return str

    def set(self, pname, value):
        if pname not in self.defaults:
            msg = "Unknown property '{0}' in section '{1}'"
            raise ConfigError(msg.format(pname, self.name))
        try:
            pvalue = self._coercer(pname)(value)
        except (TypeError, ValueError) as e:
            msg = "Invalid value {0!r} for '{1}.{2}': {3}"
            raise ConfigError(msg.format(value, self.name, pname, e))
        setattr(self, pname, pvalue)

    def validate(self):
        pass

    def properties(self):
        return {pname: getattr(self, pname) for pname in self.defaults}

    def to_strings(self):
        return {k: _format(v) for k, v in self.properties().items()}

    @classmethod
    def from_strings(cls, strings):
        known = {}
        for pname, value in strings.items():
            if pname not in cls.defaults:
                msg = "Ignoring unknown property '%s' in section '%s'."
                logger.warning(msg, pname, cls.name)
                continue
            known[pname] = value
        return cls(**known)

    def copy(self, **changes):
        properties = self.properties()
        properties.update(changes)
        return self.__class__(**properties)

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.properties() == other.properties()
        )

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        tpl = "<{0} {1}>"
        return tpl.format(self.__class__.__name__, self.to_strings())
