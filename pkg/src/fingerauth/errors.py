"""Exception types shared across the package."""


class PipelineError(Exception):
    """Base class for failures while turning a photo into a template."""


class NoFingerError(PipelineError):
    """Segmentation could not isolate a finger from the scene."""


class NoFeaturesError(PipelineError):
    """The pipeline ran to completion but produced zero minutiae."""


class TemplateFormatError(ValueError):
    """Base class for template file parsing failures."""


class BadMagicError(TemplateFormatError):
    """The file does not start with the template magic bytes."""


class BadVersionError(TemplateFormatError):
    """The file carries an unsupported format version."""


class TruncatedTemplateError(TemplateFormatError):
    """The file is shorter than its header claims."""
