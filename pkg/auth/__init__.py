"""Enrollment and verification"""
from .enrollment import LipAuthenticator, enroll, verify
from .store import EnrollmentRecord, get_record, read_records, store_transaction
