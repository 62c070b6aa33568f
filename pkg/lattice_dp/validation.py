from marshmallow import ValidationError

from .schemas.operator_schema import InstanceSchema, OperatorSchema


def validate_operator_input(data):
    schema = OperatorSchema()
    try:
        operator = schema.load(data)
        return operator, None
    except ValidationError as err:
        return None, err.messages


def validate_instance_input(data):
    """Operator JSON with an optional "meta" object; returns ({"operator", "meta"}, None) or (None, messages)."""
    schema = InstanceSchema()
    try:
        return schema.load(data), None
    except ValidationError as err:
        return None, err.messages
