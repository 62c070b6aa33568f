from marshmallow import Schema, fields, post_dump

from ..models import to_plain


class CheckRowSchema(Schema):
    """One report row: the check name, outcome and instance, with the check's values flattened in."""
    check = fields.String(attribute="name")
    holds = fields.Boolean(allow_none=True)
    instance = fields.String()
    exact = fields.Boolean()

    @post_dump(pass_original=True)
    def flatten_values(self, data, report, **kwargs):
        for key, value in report.values.items():
            data.setdefault(key, to_plain(value))
        return data


class RunReportSchema(Schema):
    command = fields.String(required=True)
    inputs_digest = fields.String(required=True)
    rows = fields.List(fields.Dict(keys=fields.String()), required=True)
    timing = fields.Float(allow_none=True, load_default=None)

    @post_dump
    def plain_rows(self, data, **kwargs):
        data["rows"] = [to_plain(row) for row in data["rows"]]
        return data
