import math

from marshmallow import EXCLUDE, Schema, ValidationError, fields, post_dump, post_load, validate, validates_schema

from ..models import LatticeOperator, LatticeSpace, NormKind, NormSpec, format_exponent, parse_exponent
from ..utils.exceptions import DimensionError, InputParseError


class Exponent(fields.Field):
    """A norm exponent p >= 1: a number or the string "inf"."""

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return format_exponent(value)

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, bool):
            raise ValidationError("Exponent must be a number or \"inf\"")
        try:
            return parse_exponent(value)
        except (InputParseError, TypeError) as err:
            raise ValidationError(str(err))


class NormSchema(Schema):
    """{"kind": "lp" | "weighted_lp" | "sup", "p": number | "inf", "weights": [...]}"""

    class Meta:
        unknown = EXCLUDE

    kind = fields.Function(
        serialize=lambda spec: spec.kind.value,
        deserialize=lambda value: value,
        required=True,
        validate=validate.OneOf([k.value for k in NormKind]),
    )
    p = Exponent(load_default=None)
    weights = fields.List(fields.Float(allow_nan=False), load_default=None)

    @validates_schema
    def validate_exponent(self, data, **kwargs):
        kind, p = data.get("kind"), data.get("p")
        if kind == NormKind.SUP.value:
            if p is not None and not math.isinf(p):
                raise ValidationError("Sup norms take p = \"inf\"", "p")
        elif p is None:
            raise ValidationError(f"{kind} norms need an exponent", "p")

    @post_load
    def make_spec(self, data, **kwargs):
        kind = NormKind(data["kind"])
        if kind is NormKind.SUP:
            return NormSpec.sup()
        if kind is NormKind.LP:
            if data.get("weights") is not None:
                raise ValidationError("lp norms take no weights; use weighted_lp", "weights")
            return NormSpec.lp(data["p"])
        if data.get("weights") is None:
            raise ValidationError("weighted_lp norms need weights", "weights")
        return NormSpec.weighted(data["p"], data["weights"])

    @post_dump
    def drop_missing_weights(self, data, **kwargs):
        if data.get("weights") is None:
            data.pop("weights", None)
        return data


class SpaceSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    dim = fields.Integer(required=True, strict=True, validate=validate.Range(min=1))
    norm = fields.Nested(NormSchema, attribute="norm_spec", data_key="norm", required=True)

    @post_load
    def make_space(self, data, **kwargs):
        return LatticeSpace(data["dim"], data["norm_spec"])


class OperatorSchema(Schema):
    """
    Operator JSON: domain and codomain spaces and the row-major m×n matrix.
    Shape mismatches surface as DimensionError when the operator is built.
    """

    class Meta:
        unknown = EXCLUDE

    domain = fields.Nested(SpaceSchema, required=True)
    codomain = fields.Nested(SpaceSchema, required=True)
    matrix = fields.List(fields.List(fields.Float(allow_nan=False)), required=True)

    @post_load
    def make_operator(self, data, **kwargs):
        return LatticeOperator(data["domain"], data["codomain"], _rectangular(data["matrix"]))


class InstanceSchema(OperatorSchema):
    """Operator JSON plus the generator's "meta" object."""
    meta = fields.Dict(keys=fields.String(), load_default=dict)

    @post_load
    def make_operator(self, data, **kwargs):
        operator = LatticeOperator(data["domain"], data["codomain"], _rectangular(data["matrix"]))
        return {"operator": operator, "meta": data.get("meta") or {}}


def _rectangular(rows):
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise DimensionError(f"Matrix rows have differing lengths {sorted(widths)}")
    return rows
