from .operator_schema import Exponent, InstanceSchema, NormSchema, OperatorSchema, SpaceSchema
from .result_schemas import CheckRowSchema, RunReportSchema
