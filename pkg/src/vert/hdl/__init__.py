"""RTL/SVA abstract syntax, parsing, printing and value semantics."""
from vert.hdl.ast import (  # noqa: F401
    AlwaysBlock,
    Assign,
    Binary,
    Block,
    Case,
    CaseArm,
    Cast,
    Decl,
    Ident,
    If,
    IfArm,
    Instance,
    Literal,
    Param,
    Past,
    Property,
    RtlModule,
    Stable,
    Ternary,
    Unary,
)
from vert.hdl.parser import (  # noqa: F401
    ParseDiagnostic,
    parse_block,
    parse_expr,
    parse_module,
    parse_properties,
    parse_statements,
)
from vert.hdl.preprocess import preprocess  # noqa: F401
from vert.hdl.printer import (  # noqa: F401
    format_expr,
    pretty_print_module,
    pretty_print_properties,
    pretty_print_property,
)
from vert.hdl.values import BitVec, eval_expr  # noqa: F401
