# encoding: utf-8
import logging
import xml.etree.ElementTree as ET
from collections import OrderedDict

from pyaud.errors import ConfigError, NotFound

__all__ = ["PipelineDefinition", "indent", "version_tuple"]

logger = logging.getLogger(__name__)


# in-place prettyprint formatter
def indent(elem, level=0):
    i = "\n" + level * "  "
    if len(elem):
        if not elem.text or not elem.text.strip():
            elem.text = i + "  "
        if not elem.tail or not elem.tail.strip():
            elem.tail = i
        for child in elem:
            indent(child, level + 1)
        if not child.tail or not child.tail.strip():
            child.tail = i
    else:
        if level and (not elem.tail or not elem.tail.strip()):
            elem.tail = i


def version_tuple(version):
    """Version string as ints, "1.10" -> (1, 10)."""
    try:
        return tuple(int(part) for part in version.split("."))
    except (AttributeError, ValueError):
        raise ConfigError("Bad definition version: {0!r}".format(version))


class PipelineDefinition(object):
    """XML tree of named sections holding string properties::

        <pipeline version="1.0">
          <section name="frontend">
            <property name="frame_len">0.025</property>
          </section>
        </pipeline>
    """

    def __init__(self):
        super(PipelineDefinition, self).__init__()
        self.tree = None
        self.root = None
        self._latest_version = "1.0"
        self.version = self._latest_version
        self.__create()

    def __create(self):
        self.root = root = ET.Element("pipeline")
        root.set("version", self._latest_version)
        self.tree = ET.ElementTree(root)

    def _tree_load(self, tree):
        root = tree.getroot()
        if root.tag != "pipeline":
            msg = "Expected a <pipeline> document, found <{0}>."
            raise ConfigError(msg.format(root.tag))
        self.version = root.get("version", self._latest_version)
        if version_tuple(self.version) > version_tuple(self._latest_version):
            msg = "Definition version %s is newer than %s, loading anyway."
            logger.warning(msg, self.version, self._latest_version)
        self.tree = tree
        self.root = root

    def load_file(self, file_or_filename):
        try:
            etree = ET.parse(file_or_filename)
        except FileNotFoundError:
            raise NotFound("File not found: {0}".format(file_or_filename))
        except ET.ParseError as e:
            raise ConfigError("Invalid definition file: {0}".format(e))
        self._tree_load(etree)

    def load_from_string(self, source):
        try:
            tree = ET.ElementTree(ET.fromstring(source))
        except ET.ParseError as e:
            raise ConfigError("Invalid definition: {0}".format(e))
        self._tree_load(tree)

    def _section_node(self, name):
        return self.root.find("./section[@name='{0}']".format(name))

    def section_names(self):
        return [node.get("name") for node in self.root.findall("./section")]

    def get_section(self, name):
        """Property strings of section name, None if absent."""
        node = self._section_node(name)
        if node is None:
            return None
        properties = OrderedDict()
        for pnode in node.findall("./property"):
            properties[pnode.get("name")] = (pnode.text or "").strip()
        return properties

    def set_section(self, name, properties):
        node = self._section_node(name)
        if node is not None:
            self.root.remove(node)
        node = ET.SubElement(self.root, "section")
        node.set("name", name)
        for pname in sorted(properties):
            pnode = ET.SubElement(node, "property")
            pnode.set("name", pname)
            pnode.text = properties[pname]
        return node

    def __str__(self):
        indent(self.root)
        return ET.tostring(self.root, encoding="unicode")

    def __repr__(self):
        return '<PipelineDefinition xml="{0}">'.format(self.__str__())

    def save(self, file_or_filename):
        indent(self.root)
        self.tree.write(file_or_filename, xml_declaration=True, encoding="utf-8")
