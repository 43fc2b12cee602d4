from stacklin.conf import get_options


def get_stack(impl, recorder=None, threads=1, options=None):
    """Build the stack registered under ``impl`` in ``STACKLIN['STACKS']``."""
    options = options if options is not None else get_options()
    return options.stack_class(impl).from_options(options, recorder=recorder, threads=threads)
